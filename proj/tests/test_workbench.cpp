#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bora/dag.hpp"
#include "bora/errors.hpp"
#include "bora/experiments.hpp"
#include "bora/io.hpp"
#include "bora/model.hpp"
#include "bora/rng.hpp"

using namespace bora;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream f(path, std::ios::binary);
  f << body;
  return path;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// Small posterior sample to exercise the writers and the checkpoint format.
struct FitBundle {
  Dataset data;
  ReferenceDag dag;
  McmcChain chain;
};

FitBundle tiny_fit() {
  FitBundle fb;
  Rng rng(314);
  const int k = 12;
  for (int i = 0; i < k; ++i)
    fb.data.locations.push_back(
        {4.0 * rng.uniform(), 4.0 * rng.uniform()});
  const Ordering ord = order_reference(fb.data.locations, OrderStrategy::by_y);
  fb.data.locations = apply_ordering(fb.data.locations, ord);
  fb.data.y.resize(k);
  for (int i = 0; i < k; ++i)
    fb.data.y[i] = 0.4 + fb.data.locations[i].x * 0.1 + 0.3 * rng.normal();
  fb.data.X.resize(k, 0);
  BarrierSet none;
  fb.dag = build_reference_dag(fb.data.locations, 3, none);
  CovarianceSpec init{1.0, 1.5, 0.5};
  PriorSpec priors;
  priors.phi_lower = 0.5;
  priors.phi_upper = 3.0;
  McmcConfig mc;
  mc.iterations = 60;
  mc.burn_in = 20;
  mc.thin = 1;
  mc.seed = 2718;
  fb.chain = gibbs_fit(fb.data, fb.dag, init, priors, mc);
  return fb;
}

}  // namespace

TEST_CASE("points csv loader handles quirks and drops exact duplicates") {
  const std::string path = write_tmp(
      "bora_wb_points.csv",
      "  x , y ,value, elev ,slope \r\n"
      "0.0,0.0,1.5,10,0.1\n"
      "1.0,0.0,2.5,11,0.2\r\n"
      "\n"
      "0.0,0.0,99.0,99,9.9\n"
      "1e-3,2.0,-3.25,12,0.3\n"
      "0.0,-0.0,77.0,77,7.7\n"
      "4.0,5.0,0.5,13,0.4\n");
  const PointsFile pf = load_points_csv(path, true);

  CHECK(pf.covariate_names == std::vector<std::string>{"elev", "slope"});
  CHECK(pf.dropped_duplicates == 2);  // exact repeat and the -0.0 alias
  REQUIRE(pf.locations.size() == 4);
  CHECK(pf.locations[0] == Location{0.0, 0.0});
  CHECK(pf.locations[1] == Location{1.0, 0.0});
  CHECK(pf.locations[2] == Location{1e-3, 2.0});
  CHECK(pf.locations[3] == Location{4.0, 5.0});
  REQUIRE(pf.values.size() == 4);
  CHECK(pf.values[0] == 1.5);  // first occurrence wins
  CHECK(pf.values[2] == -3.25);
  REQUIRE(pf.covariates.rows() == 4);
  REQUIRE(pf.covariates.cols() == 2);
  CHECK(pf.covariates(0, 0) == 10.0);
  CHECK(pf.covariates(0, 1) == 0.1);
  CHECK(pf.covariates(3, 1) == 0.4);

  const Dataset d = to_dataset(pf);
  CHECK(d.locations == pf.locations);
  CHECK(d.y == pf.values);
  CHECK(d.X == pf.covariates);
}

TEST_CASE("points csv loader keys columns by header name") {
  const std::string permuted =
      write_tmp("bora_wb_perm.csv", "value,y,x\n7.0,2.0,3.0\n");
  const PointsFile pf = load_points_csv(permuted, true);
  REQUIRE(pf.locations.size() == 1);
  CHECK(pf.locations[0] == Location{3.0, 2.0});
  CHECK(pf.values[0] == 7.0);
  CHECK(pf.covariate_names.empty());
  CHECK(pf.covariates.cols() == 0);

  const std::string bare = write_tmp("bora_wb_bare.csv", "x,y\n1,2\n3,4\n");
  const PointsFile sites = load_points_csv(bare, false);
  CHECK(sites.locations.size() == 2);
  CHECK(sites.values.size() == 0);
  CHECK_THROWS_WITH_AS(load_points_csv(bare, true),
                       doctest::Contains("must contain a value column"),
                       ParseError);

  const std::string noy = write_tmp("bora_wb_noy.csv", "y,value\n1,2\n");
  CHECK_THROWS_WITH_AS(load_points_csv(noy, false),
                       doctest::Contains("must contain x and y columns"),
                       ParseError);
}

TEST_CASE("points csv loader reports line numbers on bad input") {
  const std::string badnum =
      write_tmp("bora_wb_badnum.csv", "x,y,value\n0,0,1\noops,0,2\n");
  CHECK_THROWS_WITH_AS(load_points_csv(badnum, true),
                       doctest::Contains("line 3: cannot parse number 'oops'"),
                       ParseError);

  const std::string shortrow =
      write_tmp("bora_wb_short.csv", "x,y,value\n0,0\n");
  CHECK_THROWS_WITH_AS(load_points_csv(shortrow, true),
                       doctest::Contains("line 2: too few fields"), ParseError);

  const std::string nanx =
      write_tmp("bora_wb_nanx.csv", "x,y,value\nnan,0,1\n");
  CHECK_THROWS_WITH_AS(load_points_csv(nanx, true),
                       doctest::Contains("line 2: non-finite coordinate"),
                       NonFinite);
  const std::string infy =
      write_tmp("bora_wb_infy.csv", "x,y,value\n0,0,1\n0,inf,1\n");
  CHECK_THROWS_WITH_AS(load_points_csv(infy, true),
                       doctest::Contains("line 3"), NonFinite);

  const std::string empty = write_tmp("bora_wb_empty.csv", "");
  CHECK_THROWS_WITH_AS(load_points_csv(empty, true),
                       doctest::Contains("empty file"), ParseError);
  CHECK_THROWS_AS(load_points_csv("/tmp/bora_wb_does_not_exist.csv", false),
                  IoError);
}

TEST_CASE("edge dump round-trips the neighbor table") {
  Rng rng(55);
  std::vector<Location> pts;
  for (int i = 0; i < 9; ++i)
    pts.push_back({3.0 * rng.uniform(), 3.0 * rng.uniform()});
  const Ordering ord = order_reference(pts, OrderStrategy::by_sum);
  pts = apply_ordering(pts, ord);
  BarrierSet none;
  const ReferenceDag dag = build_reference_dag(pts, 3, none);

  const std::string path = "/tmp/bora_wb_edges.csv";
  write_edges_csv(path, dag);
  const std::vector<std::string> lines = read_lines(path);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "target,neighbor,provenance,distance");

  std::size_t row = 1;
  for (std::size_t i = 0; i < dag.nbrs.size(); ++i) {
    const NeighborList& nl = dag.nbrs[i];
    for (std::size_t t = 0; t < nl.idx.size(); ++t, ++row) {
      REQUIRE(row < lines.size());
      const std::vector<std::string> cells = split(lines[row]);
      REQUIRE(cells.size() == 4);
      CHECK(std::stoul(cells[0]) == i);
      CHECK(std::stol(cells[1]) == nl.idx[t]);
      CHECK(cells[2] == provenance_name(nl.prov[t]));
      // 17 significant digits round-trip exactly
      CHECK(std::stod(cells[3]) == nl.dist[t]);
    }
  }
  CHECK(row == lines.size());
}

TEST_CASE("prediction and summary writers round-trip their numbers") {
  const FitBundle fb = tiny_fit();
  BarrierSet none;
  const std::vector<Location> sites{{0.5, 0.5}, {2.0, 1.0}, {3.5, 3.5}};
  Eigen::MatrixXd Xs(3, 0);
  const PredictionResult pred =
      predict(fb.chain, fb.dag, none, sites, Xs, 17, 1);

  const std::string ppath = "/tmp/bora_wb_pred.csv";
  write_prediction_csv(ppath, pred);
  const std::vector<std::string> plines = read_lines(ppath);
  REQUIRE(plines.size() == 1 + sites.size());
  CHECK(plines[0] == "x,y,w_mean,w_sd,y_mean,y_sd,y_q025,y_q975");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const std::vector<std::string> c = split(plines[1 + i]);
    REQUIRE(c.size() == 8);
    CHECK(std::stod(c[0]) == pred.sites[i].x);
    CHECK(std::stod(c[1]) == pred.sites[i].y);
    CHECK(std::stod(c[2]) == pred.w_mean[i]);
    CHECK(std::stod(c[3]) == pred.w_sd[i]);
    CHECK(std::stod(c[4]) == pred.y_mean[i]);
    CHECK(std::stod(c[5]) == pred.y_sd[i]);
    CHECK(std::stod(c[6]) == pred.y_lo[i]);
    CHECK(std::stod(c[7]) == pred.y_hi[i]);
  }

  const std::vector<SummaryRow> rows = summarize(fb.chain);
  REQUIRE(rows.size() == 5);  // beta0, tau2, sigma2, phi, microergodic
  const std::string spath = "/tmp/bora_wb_summary.csv";
  write_summary_csv(spath, rows);
  const std::vector<std::string> slines = read_lines(spath);
  REQUIRE(slines.size() == 1 + rows.size());
  CHECK(slines[0] == "parameter,mean,sd,q025,q500,q975,ess");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::vector<std::string> c = split(slines[1 + i]);
    REQUIRE(c.size() == 7);
    CHECK(c[0] == rows[i].name);
    CHECK(std::stod(c[1]) == rows[i].mean);
    CHECK(std::stod(c[2]) == rows[i].sd);
    CHECK(std::stod(c[3]) == rows[i].q025);
    CHECK(std::stod(c[4]) == rows[i].q500);
    CHECK(std::stod(c[5]) == rows[i].q975);
    CHECK(std::stod(c[6]) == rows[i].ess);
  }
  CHECK(slines[1].substr(0, 6) == "beta0,");
}

TEST_CASE("chain checkpoint restores bit for bit") {
  const FitBundle fb = tiny_fit();
  const std::string path = "/tmp/bora_wb_chain.bin";
  save_chain(path, fb.chain);
  const McmcChain back = load_chain(path);

  CHECK(back.k == fb.chain.k);
  CHECK(back.p == fb.chain.p);
  CHECK(back.draws() == fb.chain.draws());
  CHECK(back.seed == fb.chain.seed);
  CHECK(back.nu == fb.chain.nu);
  CHECK(back.phi_lower == fb.chain.phi_lower);
  CHECK(back.phi_upper == fb.chain.phi_upper);
  CHECK(back.accept_rate == fb.chain.accept_rate);
  CHECK(back.beta == fb.chain.beta);
  CHECK(back.tau2 == fb.chain.tau2);
  CHECK(back.sigma2 == fb.chain.sigma2);
  CHECK(back.phi == fb.chain.phi);
  CHECK(back.w == fb.chain.w);

  // restored chain is usable downstream
  BarrierSet none;
  Eigen::MatrixXd Xs(1, 0);
  const PredictionResult a =
      predict(fb.chain, fb.dag, none, {{1.0, 1.0}}, Xs, 5, 1);
  const PredictionResult b =
      predict(back, fb.dag, none, {{1.0, 1.0}}, Xs, 5, 1);
  CHECK(a.y_mean == b.y_mean);
  CHECK(a.w_sd == b.w_sd);
}

TEST_CASE("chain checkpoint rejects damaged files") {
  const FitBundle fb = tiny_fit();
  const std::string good = "/tmp/bora_wb_chain_good.bin";
  save_chain(good, fb.chain);

  const std::string badmagic = write_tmp("bora_wb_chain_magic.bin",
                                         "NOTCHAINxxxxxxxxxxxxxxxxxxxxxxxx");
  CHECK_THROWS_WITH_AS(load_chain(badmagic),
                       doctest::Contains("not a chain checkpoint"),
                       ParseError);

  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();
  REQUIRE(bytes.size() > 50);
  const std::string trunc =
      write_tmp("bora_wb_chain_trunc.bin", bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_WITH_AS(load_chain(trunc),
                       doctest::Contains("truncated checkpoint"), ParseError);

  // zero out k in the header: magic(8) then int64 k
  std::string zeroed = bytes;
  for (int i = 8; i < 16; ++i) zeroed[i] = '\0';
  const std::string dims = write_tmp("bora_wb_chain_dims.bin", zeroed);
  CHECK_THROWS_WITH_AS(load_chain(dims),
                       doctest::Contains("corrupt checkpoint dimensions"),
                       ParseError);

  CHECK_THROWS_AS(load_chain("/tmp/bora_wb_chain_missing.bin"), IoError);
}

TEST_CASE("config files parse key=value with comments") {
  const std::string path = write_tmp("bora_wb_cfg.txt",
                                     "# run settings\n"
                                     "iterations = 500\n"
                                     "\n"
                                     "phi=2.5   # decay\n"
                                     "label = faults run\n"
                                     "out =\n");
  const auto cfg = load_config(path);
  CHECK(cfg.size() == 4);
  CHECK(config_long(cfg, "iterations", -1) == 500);
  CHECK(config_long(cfg, "missing", 42) == 42);
  CHECK(config_double(cfg, "phi", 0.0) == 2.5);
  CHECK(config_double(cfg, "absent", 1.25) == 1.25);
  CHECK(config_str(cfg, "label", "") == "faults run");
  CHECK(config_str(cfg, "out", "fallback") == "");
  CHECK(config_str(cfg, "nope", "fallback") == "fallback");

  const std::string bad = write_tmp("bora_wb_cfg_bad.txt", "a=1\nnot a pair\n");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("line 2"),
                       ParseError);
  CHECK_THROWS_AS(load_config("/tmp/bora_wb_cfg_missing.txt"), IoError);

  const auto typo = load_config(write_tmp("bora_wb_cfg_typo.txt", "phi=fast\n"));
  CHECK_THROWS_AS(config_double(typo, "phi", 0.0), ParseError);
  CHECK_THROWS_WITH_AS(config_long(typo, "phi", 0),
                       doctest::Contains("config key phi"), ParseError);
}

TEST_CASE("doors demo separates the two sides of the wall") {
  DoorsConfig cfg;
  cfg.outdir = "/tmp/bora_wb_doors";
  const DoorsResult res = run_doors_demo(cfg);

  CHECK(res.k == 189);
  CHECK(res.across.dist > 0.0);
  CHECK(res.across.base > 0.0);
  // blocked pairs decorrelate relative to the stationary kernel
  CHECK(res.across.dag_cov < res.across.base);
  CHECK(res.offgrid.dag_cov < res.offgrid.base);
  // the opening lets dependence through
  CHECK(res.opening.dag_cov > res.across.dag_cov);
  // unobstructed short-range pairs keep the stationary covariance
  const double ratio = res.nearby.dag_cov / res.nearby.base;
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);

  CHECK(std::filesystem::exists("/tmp/bora_wb_doors/doors_field.csv"));
  CHECK(std::filesystem::exists("/tmp/bora_wb_doors/doors_edges.csv"));
  const std::vector<std::string> elines =
      read_lines("/tmp/bora_wb_doors/doors_edges.csv");
  CHECK(elines[0] == "target,neighbor,provenance,distance");
  CHECK(elines.size() > static_cast<std::size_t>(res.k));
}

TEST_CASE("faults experiment runs end to end on a reduced grid") {
  FaultsConfig cfg;
  cfg.replicates = 1;
  cfg.grid_n = 23;
  cfg.train_stride_x = 4;
  cfg.train_stride_y = 2;
  cfg.m = 8;
  cfg.iterations = 500;
  cfg.burn_in = 250;
  cfg.thin = 1;
  cfg.seed = 7;
  cfg.outdir = "/tmp/bora_wb_faults";
  const FaultsResult res = run_faults_experiment(cfg);

  REQUIRE(res.reps.size() == 1);
  const FaultsReplicate& rep = res.reps[0];
  CHECK(rep.barrier.n > 0);
  CHECK(rep.barrier.n == rep.plain.n);
  CHECK(rep.barrier.rmspe > 0.0);
  CHECK(rep.barrier.rmspe < 1.0);
  CHECK(rep.plain.rmspe > 0.0);
  CHECK(rep.barrier.coverage >= 0.5);
  CHECK(rep.barrier.coverage <= 1.0);
  CHECK(rep.barrier.ci_width > 0.0);
  CHECK(std::isfinite(rep.beta1_mean));
  CHECK(rep.tau2_mean > 0.0);
  CHECK(rep.micro_mean > 0.0);
  // single replicate: the means are the replicate values
  CHECK(res.mean_beta1 == rep.beta1_mean);
  CHECK(res.mean_rmspe_barrier == rep.barrier.rmspe);
  CHECK(res.mean_rmspe_plain == rep.plain.rmspe);
  CHECK(res.mean_coverage_barrier == rep.barrier.coverage);

  const std::vector<std::string> slines =
      read_lines("/tmp/bora_wb_faults/faults_scores.csv");
  REQUIRE(slines.size() == 3);  // header + barrier + plain rows
  CHECK(slines[0] == "replicate,model,rmspe,mape,coverage,ci_width");
  CHECK(std::filesystem::exists(
      "/tmp/bora_wb_faults/faults_summary_rep0.csv"));
}

TEST_CASE("ordering study reports one rmspe per coordinate ordering") {
  OrderingConfig cfg;
  cfg.grid_n = 15;
  cfg.train_stride = 2;
  cfg.m = 6;
  cfg.iterations = 400;
  cfg.burn_in = 200;
  cfg.thin = 1;
  cfg.outdir = "/tmp/bora_wb_ordering";
  const OrderingResult res = run_ordering_study(cfg);

  CHECK(res.names == std::vector<std::string>{"x", "y", "sum"});
  REQUIRE(res.rmspe.size() == 3);
  double lo = res.rmspe[0], hi = res.rmspe[0];
  for (double r : res.rmspe) {
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(res.spread == hi - lo);
  CHECK(std::filesystem::exists("/tmp/bora_wb_ordering/ordering_rmspe.csv"));
}
