#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bora/experiments.hpp"
#include "bora/io.hpp"
#include "bora/variogram.hpp"
#include "bora/wkt.hpp"

namespace {

using namespace bora;

BarrierSet load_barriers_opt(const std::string& path) {
  if (path.empty()) return {};
  return load_barriers_wkt(path);
}

Ordering make_ordering(const std::vector<Location>& locs,
                       const std::string& order, const std::string& file) {
  if (order == "file") {
    if (file.empty()) throw InvalidSpec("--order file needs --order-file");
    std::ifstream f(file);
    if (!f) throw IoError("cannot open ordering file: " + file);
    std::vector<int> perm;
    int v;
    while (f >> v) perm.push_back(v);
    return explicit_ordering(std::move(perm), locs.size());
  }
  OrderStrategy s;
  if (order == "x")
    s = OrderStrategy::by_x;
  else if (order == "y")
    s = OrderStrategy::by_y;
  else if (order == "sum")
    s = OrderStrategy::by_sum;
  else if (order == "product-desc")
    s = OrderStrategy::by_product_desc;
  else
    throw InvalidSpec("unknown ordering: " + order);
  return order_reference(locs, s);
}

double bbox_diagonal(const std::vector<Location>& locs) {
  double xmin = locs[0].x, xmax = locs[0].x;
  double ymin = locs[0].y, ymax = locs[0].y;
  for (const Location& p : locs) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::sqrt((xmax - xmin) * (xmax - xmin) +
                   (ymax - ymin) * (ymax - ymin));
}

void default_phi_bounds(const std::vector<Location>& locs, double nu,
                        PriorSpec* priors) {
  const double h = bbox_diagonal(locs);
  if (h <= 0) throw InvalidSpec("degenerate point cloud");
  const double xstar = matern_decay_distance(nu, 1.0, 0.05);
  if (priors->phi_lower <= 0) priors->phi_lower = xstar / (0.75 * h);
  if (priors->phi_upper <= 0) priors->phi_upper = xstar / (0.25 * h);
}

struct FitArgs {
  std::string points, barriers, config, out, summary;
  std::string order = "y", order_file;
  int m = 15;
  std::uint64_t seed = 1;
  int threads = 1;
};

void run_fit(const FitArgs& a) {
  const PointsFile pf = load_points_csv(a.points, true);
  const Dataset data = to_dataset(pf);
  const BarrierSet b = load_barriers_opt(a.barriers);
  const Ordering ord = make_ordering(data.locations, a.order, a.order_file);

  Dataset ordered;
  ordered.locations = apply_ordering(data.locations, ord);
  ordered.y.resize(data.n());
  ordered.X.resize(data.n(), data.p());
  for (int j = 0; j < data.n(); ++j) {
    ordered.y[j] = data.y[ord.perm[j]];
    if (data.p() > 0) ordered.X.row(j) = data.X.row(ord.perm[j]);
  }

  std::map<std::string, std::string> cfg;
  if (!a.config.empty()) cfg = load_config(a.config);

  McmcConfig mc;
  mc.iterations = static_cast<int>(config_long(cfg, "iterations", 6000));
  mc.burn_in = static_cast<int>(config_long(cfg, "burn_in", mc.iterations / 2));
  mc.thin = static_cast<int>(config_long(cfg, "thin", 1));
  mc.seed = a.seed;
  mc.threads = a.threads;
  mc.phi_proposal_sd = config_double(cfg, "phi_proposal_sd", 0.5);
  mc.adapt = config_long(cfg, "adapt", 1) != 0;

  const double nu = config_double(cfg, "nu", 0.5);
  PriorSpec priors;
  priors.a_tau = config_double(cfg, "a_tau", 2.0);
  priors.b_tau = config_double(cfg, "b_tau", 0.1);
  priors.a_sigma = config_double(cfg, "a_sigma", 2.0);
  priors.b_sigma = config_double(cfg, "b_sigma", 1.0);
  priors.phi_lower = config_double(cfg, "phi_lower", 0.0);
  priors.phi_upper = config_double(cfg, "phi_upper", 0.0);
  default_phi_bounds(data.locations, nu, &priors);

  CovarianceSpec init{1.0, 0.5 * (priors.phi_lower + priors.phi_upper), nu};
  starting_values(ordered, nu, &init, &mc);
  init.sigma2 = config_double(cfg, "sigma2_init", init.sigma2);
  mc.tau2_init = config_double(cfg, "tau2_init", mc.tau2_init);

  const ReferenceDag dag = build_reference_dag(ordered.locations, a.m, b);
  const McmcChain chain = gibbs_fit(ordered, dag, init, priors, mc);
  save_chain(a.out, chain);

  const std::vector<SummaryRow> rows = summarize(chain);
  if (!a.summary.empty()) write_summary_csv(a.summary, rows);
  std::cout << "n=" << data.n() << " m=" << a.m << " draws=" << chain.draws()
            << " accept=" << chain.accept_rate << "\n";
  for (const SummaryRow& r : rows)
    std::cout << r.name << " mean=" << r.mean << " sd=" << r.sd
              << " ess=" << r.ess << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process regression with barrier-aware neighbor DAGs"};
  app.require_subcommand(1);

  // neighbors: dump the DAG edge list
  auto* nb = app.add_subcommand("neighbors", "build a reference DAG");
  std::string nb_points, nb_barriers, nb_out, nb_order = "y", nb_order_file;
  int nb_m = 15;
  nb->add_option("--points", nb_points, "points csv")->required();
  nb->add_option("--barriers", nb_barriers, "barrier wkt");
  nb->add_option("--m", nb_m, "neighbors per node");
  nb->add_option("--order", nb_order, "x|y|sum|product-desc|file");
  nb->add_option("--order-file", nb_order_file, "explicit permutation file");
  nb->add_option("--out", nb_out, "edge csv")->required();
  nb->callback([&] {
    const PointsFile pf = load_points_csv(nb_points, false);
    const BarrierSet b = load_barriers_opt(nb_barriers);
    const Ordering ord = make_ordering(pf.locations, nb_order, nb_order_file);
    const ReferenceDag dag =
        build_reference_dag(apply_ordering(pf.locations, ord), nb_m, b);
    write_edges_csv(nb_out, dag);
    std::size_t edges = 0;
    for (const NeighborList& nl : dag.nbrs) edges += nl.idx.size();
    std::cout << "k=" << dag.refs.size() << " edges=" << edges
              << " escapes=" << dag.escapes.size() << "\n";
  });

  // fit
  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler");
  FitArgs fa;
  fit->add_option("--points", fa.points, "training csv")->required();
  fit->add_option("--barriers", fa.barriers, "barrier wkt");
  fit->add_option("--m", fa.m, "neighbors per node");
  fit->add_option("--order", fa.order, "x|y|sum|product-desc|file");
  fit->add_option("--order-file", fa.order_file, "explicit permutation file");
  fit->add_option("--config", fa.config, "key=value sampler settings");
  fit->add_option("--seed", fa.seed, "rng seed");
  fit->add_option("--threads", fa.threads, "worker threads");
  fit->add_option("--out", fa.out, "chain checkpoint")->required();
  fit->add_option("--summary", fa.summary, "posterior summary csv");
  fit->callback([&] { run_fit(fa); });

  // predict
  auto* pr = app.add_subcommand("predict", "posterior predictive at new sites");
  std::string pr_chain, pr_train, pr_barriers, pr_sites, pr_out;
  std::string pr_order = "y", pr_order_file;
  int pr_m = 15, pr_threads = 1;
  std::uint64_t pr_seed = 1;
  bool pr_clamp = false;
  pr->add_option("--chain", pr_chain, "fit checkpoint")->required();
  pr->add_option("--points", pr_train, "training csv used for the fit")
      ->required();
  pr->add_option("--barriers", pr_barriers, "barrier wkt");
  pr->add_option("--m", pr_m, "neighbors per node");
  pr->add_option("--order", pr_order, "x|y|sum|product-desc|file");
  pr->add_option("--order-file", pr_order_file, "explicit permutation file");
  pr->add_option("--sites", pr_sites, "prediction sites csv")->required();
  pr->add_option("--seed", pr_seed, "rng seed");
  pr->add_option("--threads", pr_threads, "worker threads");
  pr->add_option("--out", pr_out, "prediction csv")->required();
  pr->add_flag("--clamp-nonnegative", pr_clamp,
               "summarize draws clamped at zero");
  pr->callback([&] {
    const McmcChain chain = load_chain(pr_chain);
    const PointsFile train = load_points_csv(pr_train, false);
    const BarrierSet b = load_barriers_opt(pr_barriers);
    const Ordering ord =
        make_ordering(train.locations, pr_order, pr_order_file);
    const ReferenceDag dag =
        build_reference_dag(apply_ordering(train.locations, ord), pr_m, b);
    const PointsFile sites = load_points_csv(pr_sites, false);
    if (static_cast<int>(sites.covariates.cols()) != chain.p)
      throw MissingCovariates("sites csv has " +
                              std::to_string(sites.covariates.cols()) +
                              " covariates, chain expects " +
                              std::to_string(chain.p));
    PredictionResult pred = predict(chain, dag, b, sites.locations,
                                    sites.covariates, pr_seed, pr_threads);
    if (pr_clamp) pred = project_nonnegative(pred);
    write_prediction_csv(pr_out, pred);
    std::cout << "predicted " << pred.sites.size() << " sites\n";
  });

  // variogram
  auto* vg = app.add_subcommand("variogram", "empirical variogram and fit");
  std::string vg_points, vg_out;
  int vg_bins = 15;
  double vg_nu = 0.5, vg_maxdist = 0.0;
  vg->add_option("--points", vg_points, "points csv")->required();
  vg->add_option("--bins", vg_bins, "distance bins");
  vg->add_option("--nu", vg_nu, "smoothness");
  vg->add_option("--max-dist", vg_maxdist, "bin range, 0 = auto");
  vg->add_option("--out", vg_out, "empirical bins csv");
  vg->callback([&] {
    const Dataset data = to_dataset(load_points_csv(vg_points, true));
    const EmpiricalVariogram emp =
        empirical_variogram(data, vg_bins, vg_maxdist);
    if (!vg_out.empty()) {
      std::ofstream f(vg_out);
      if (!f) throw IoError("cannot write " + vg_out);
      f << "distance,gamma,count\n";
      f.precision(17);
      for (std::size_t i = 0; i < emp.bin_center.size(); ++i)
        f << emp.bin_center[i] << ',' << emp.gamma[i] << ',' << emp.count[i]
          << '\n';
    }
    const VariogramFit fit = fit_matern_variogram(emp, vg_nu);
    std::cout << "tau2=" << fit.tau2 << " sigma2=" << fit.sigma2
              << " phi=" << fit.phi << " objective=" << fit.objective << "\n";
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a field over given points");
  std::string sim_points, sim_barriers, sim_out, sim_order = "y";
  int sim_m = 15;
  double sim_sigma2 = 1.0, sim_phi = 1.0, sim_nu = 0.5, sim_tau2 = 0.0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--points", sim_points, "locations csv")->required();
  sim->add_option("--barriers", sim_barriers, "barrier wkt");
  sim->add_option("--m", sim_m, "neighbors per node");
  sim->add_option("--order", sim_order, "x|y|sum|product-desc");
  sim->add_option("--sigma2", sim_sigma2, "sill");
  sim->add_option("--phi", sim_phi, "decay");
  sim->add_option("--nu", sim_nu, "smoothness");
  sim->add_option("--tau2", sim_tau2, "added nugget noise");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output csv")->required();
  sim->callback([&] {
    const PointsFile pf = load_points_csv(sim_points, false);
    const BarrierSet b = load_barriers_opt(sim_barriers);
    const Ordering ord = make_ordering(pf.locations, sim_order, "");
    const ReferenceDag dag =
        build_reference_dag(apply_ordering(pf.locations, ord), sim_m, b);
    const SparseGpFactors f =
        assemble_precision(dag, {sim_sigma2, sim_phi, sim_nu});
    Rng rng(sim_seed);
    const Eigen::VectorXd w = sample_prior_w(dag, f, rng);
    std::ofstream out(sim_out);
    if (!out) throw IoError("cannot write " + sim_out);
    out << "x,y,value\n";
    out.precision(17);
    std::vector<double> value(pf.locations.size());
    for (std::size_t j = 0; j < ord.perm.size(); ++j)
      value[ord.perm[j]] = w[static_cast<Eigen::Index>(j)];
    for (std::size_t i = 0; i < pf.locations.size(); ++i) {
      double v = value[i];
      if (sim_tau2 > 0) v += std::sqrt(sim_tau2) * rng.normal();
      out << pf.locations[i].x << ',' << pf.locations[i].y << ',' << v << '\n';
    }
    std::cout << "simulated " << pf.locations.size() << " values\n";
  });

  // experiment
  auto* ex = app.add_subcommand("experiment", "built-in studies");
  std::string ex_name, ex_outdir = "out";
  std::uint64_t ex_seed = 0;
  int ex_replicates = 0, ex_iterations = 0;
  ex->add_option("--name", ex_name, "faults|doors|ordering")->required();
  ex->add_option("--outdir", ex_outdir, "output directory");
  ex->add_option("--seed", ex_seed, "rng seed override");
  ex->add_option("--replicates", ex_replicates, "faults replicate override");
  ex->add_option("--iterations", ex_iterations, "sampler length override");
  ex->callback([&] {
    if (ex_name == "faults") {
      FaultsConfig cfg;
      cfg.outdir = ex_outdir;
      if (ex_seed) cfg.seed = ex_seed;
      if (ex_replicates) cfg.replicates = ex_replicates;
      if (ex_iterations) {
        cfg.iterations = ex_iterations;
        cfg.burn_in = ex_iterations / 2;
      }
      const FaultsResult r = run_faults_experiment(cfg);
      std::cout << "beta1=" << r.mean_beta1 << " tau2=" << r.mean_tau2
                << " microergodic=" << r.mean_micro << "\n"
                << "rmspe barrier=" << r.mean_rmspe_barrier
                << " plain=" << r.mean_rmspe_plain
                << " coverage=" << r.mean_coverage_barrier << "\n";
    } else if (ex_name == "doors") {
      DoorsConfig cfg;
      cfg.outdir = ex_outdir;
      const DoorsResult r = run_doors_demo(cfg);
      std::cout << "k=" << r.k << "\n"
                << "across    dag=" << r.across.dag_cov
                << " base=" << r.across.base << "\n"
                << "opening   dag=" << r.opening.dag_cov
                << " base=" << r.opening.base << "\n"
                << "offgrid   dag=" << r.offgrid.dag_cov
                << " base=" << r.offgrid.base << "\n"
                << "nearby    dag=" << r.nearby.dag_cov
                << " base=" << r.nearby.base << "\n";
    } else if (ex_name == "ordering") {
      OrderingConfig cfg;
      cfg.outdir = ex_outdir;
      if (ex_seed) cfg.seed = ex_seed;
      if (ex_iterations) {
        cfg.iterations = ex_iterations;
        cfg.burn_in = ex_iterations / 3;
      }
      const OrderingResult r = run_ordering_study(cfg);
      for (std::size_t i = 0; i < r.names.size(); ++i)
        std::cout << "order " << r.names[i] << " rmspe=" << r.rmspe[i] << "\n";
      std::cout << "spread=" << r.spread << "\n";
    } else {
      throw InvalidSpec("unknown experiment: " + ex_name);
    }
  });

  // score
  auto* sc = app.add_subcommand("score", "compare predictions to held-out data");
  std::string sc_pred, sc_truth;
  sc->add_option("--pred", sc_pred, "prediction csv")->required();
  sc->add_option("--truth", sc_truth, "points csv with value column")
      ->required();
  sc->callback([&] {
    std::ifstream f(sc_pred);
    if (!f) throw IoError("cannot open " + sc_pred);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> mean, lo, hi;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double x, y, wm, ws, ym, ys, yl, yh;
      if (!(row >> x >> y >> wm >> ws >> ym >> ys >> yl >> yh))
        throw ParseError(sc_pred + ": bad row");
      mean.push_back(ym);
      lo.push_back(yl);
      hi.push_back(yh);
    }
    const PointsFile truth = load_points_csv(sc_truth, true);
    const auto map = [](const std::vector<double>& v) {
      return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                               static_cast<Eigen::Index>(v.size()));
    };
    const Scores s = score(map(mean), map(lo), map(hi), truth.values);
    std::cout << "n=" << s.n << " rmspe=" << s.rmspe << " mape=" << s.mape
              << " coverage=" << s.coverage << " width=" << s.ci_width << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
