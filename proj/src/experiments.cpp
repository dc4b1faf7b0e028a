#include "bora/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "bora/io.hpp"
#include "bora/variogram.hpp"

namespace bora {

namespace {

// y-outer, x-inner, so a stable sort on y keeps this order
std::vector<Location> square_grid(int n, double lo, double hi) {
  const double step = (hi - lo) / (n - 1);
  std::vector<Location> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      pts.push_back({lo + step * ix, lo + step * iy});
  return pts;
}

std::vector<int> inverse_perm(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) inv[perm[j]] = static_cast<int>(j);
  return inv;
}

Dataset ordered_dataset(const Dataset& d, const Ordering& ord) {
  Dataset out;
  out.locations = apply_ordering(d.locations, ord);
  out.y.resize(d.y.size());
  out.X.resize(d.X.rows(), d.X.cols());
  for (std::size_t j = 0; j < ord.perm.size(); ++j) {
    out.y[static_cast<Eigen::Index>(j)] = d.y[ord.perm[j]];
    if (d.X.cols() > 0)
      out.X.row(static_cast<Eigen::Index>(j)) = d.X.row(ord.perm[j]);
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

}  // namespace

std::vector<Polyline> default_faults() {
  return {{{0.0, 1.35}, {1.7, 1.35}}, {{0.7, 0.65}, {2.0, 0.65}}};
}

FaultsResult run_faults_experiment(const FaultsConfig& cfg) {
  const int n = cfg.grid_n;
  const BarrierSet faults({}, cfg.faults);
  const BarrierSet open;
  const std::vector<Location> grid = square_grid(n, 0.0, 2.0);
  const int total = n * n;

  // one field model on the full grid, shared by every replicate
  const Ordering truth_ord = order_reference(grid, OrderStrategy::by_y);
  const std::vector<Location> truth_locs = apply_ordering(grid, truth_ord);
  const ReferenceDag truth_dag = build_reference_dag(truth_locs, cfg.m, faults);
  const CovarianceSpec truth_spec{cfg.sigma2, cfg.phi, cfg.nu};
  const SparseGpFactors truth_f = assemble_precision(truth_dag, truth_spec);
  const std::vector<int> inv = inverse_perm(truth_ord.perm);

  std::vector<int> train_ids, test_ids;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int g = iy * n + ix;
      if (ix % cfg.train_stride_x == 0 && iy % cfg.train_stride_y == 0)
        train_ids.push_back(g);
      else
        test_ids.push_back(g);
    }

  PriorSpec priors;
  const double h = distance(grid.front(), grid.back());
  const double xstar = matern_decay_distance(cfg.nu, 1.0, 0.05);
  priors.phi_lower = xstar / (0.75 * h);
  priors.phi_upper = xstar / (0.25 * h);

  ensure_dir(cfg.outdir);
  std::ofstream scores_csv;
  if (!cfg.outdir.empty()) {
    scores_csv.open(cfg.outdir + "/faults_scores.csv");
    scores_csv << "replicate,model,rmspe,mape,coverage,ci_width\n";
    scores_csv.precision(17);
  }

  FaultsResult out;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    Rng rng_w = Rng::derive(cfg.seed, 8 * rep + 1);
    Rng rng_x = Rng::derive(cfg.seed, 8 * rep + 2);
    Rng rng_e = Rng::derive(cfg.seed, 8 * rep + 3);
    const Eigen::VectorXd w_ord = sample_prior_w(truth_dag, truth_f, rng_w);
    Eigen::VectorXd covar(total), y(total);
    for (int g = 0; g < total; ++g) covar[g] = rng_x.normal();
    for (int g = 0; g < total; ++g)
      y[g] = cfg.beta0 + cfg.beta1 * covar[g] + w_ord[inv[g]] +
             std::sqrt(cfg.tau2) * rng_e.normal();

    Dataset train, test;
    auto take = [&](const std::vector<int>& ids, Dataset* d) {
      d->X.resize(static_cast<Eigen::Index>(ids.size()), 1);
      d->y.resize(static_cast<Eigen::Index>(ids.size()));
      for (std::size_t t = 0; t < ids.size(); ++t) {
        d->locations.push_back(grid[ids[t]]);
        d->y[static_cast<Eigen::Index>(t)] = y[ids[t]];
        d->X(static_cast<Eigen::Index>(t), 0) = covar[ids[t]];
      }
    };
    take(train_ids, &train);
    take(test_ids, &test);

    McmcConfig mc;
    mc.iterations = cfg.iterations;
    mc.burn_in = cfg.burn_in;
    mc.thin = cfg.thin;
    mc.seed = Rng::mix(cfg.seed ^ (0xF00DULL + rep));
    mc.threads = cfg.threads;
    CovarianceSpec init{1.0, cfg.phi, cfg.nu};
    starting_values(train, cfg.nu, &init, &mc);

    const Ordering ord = order_reference(train.locations, OrderStrategy::by_y);
    const Dataset train_ord = ordered_dataset(train, ord);

    FaultsReplicate r;
    for (int pass = 0; pass < 2; ++pass) {
      const BarrierSet& b = pass == 0 ? faults : open;
      const ReferenceDag dag =
          build_reference_dag(train_ord.locations, cfg.m, b);
      const McmcChain chain = gibbs_fit(train_ord, dag, init, priors, mc);
      const PredictionResult pred =
          predict(chain, dag, b, test.locations, test.X,
                  Rng::mix(cfg.seed ^ (0xBEEFULL + rep)), cfg.threads);
      const Scores s = score(pred, test.y);
      if (pass == 0) {
        r.barrier = s;
        r.beta1_mean = chain.beta.row(1).mean();
        r.tau2_mean = chain.tau2.mean();
        double micro = 0;
        for (int t = 0; t < chain.draws(); ++t) micro += chain.microergodic(t);
        r.micro_mean = micro / chain.draws();
        if (!cfg.outdir.empty())
          write_summary_csv(
              cfg.outdir + "/faults_summary_rep" + std::to_string(rep) + ".csv",
              summarize(chain));
      } else {
        r.plain = s;
      }
      if (scores_csv.is_open())
        scores_csv << rep << ',' << (pass == 0 ? "barrier" : "plain") << ','
                   << s.rmspe << ',' << s.mape << ',' << s.coverage << ','
                   << s.ci_width << '\n';
    }
    out.reps.push_back(r);
  }

  const double nr = static_cast<double>(out.reps.size());
  for (const FaultsReplicate& r : out.reps) {
    out.mean_beta1 += r.beta1_mean / nr;
    out.mean_tau2 += r.tau2_mean / nr;
    out.mean_micro += r.micro_mean / nr;
    out.mean_rmspe_barrier += r.barrier.rmspe / nr;
    out.mean_rmspe_plain += r.plain.rmspe / nr;
    out.mean_coverage_barrier += r.barrier.coverage / nr;
  }
  return out;
}

DoorsResult run_doors_demo(const DoorsConfig& cfg) {
  const int n = cfg.grid_n;
  const double step = (cfg.hi - cfg.lo) / (n - 1);
  auto at = [&](int tx, int ty) {
    return Location{cfg.lo + step * tx, cfg.lo + step * ty};
  };
  Polygon left, right;
  left.outer = {{cfg.lo, 4.5}, {4.5, 4.5}, {4.5, 5.5}, {cfg.lo, 5.5}};
  right.outer = {{5.5, 4.5}, {cfg.hi, 4.5}, {cfg.hi, 5.5}, {5.5, 5.5}};
  const BarrierSet doors({left, right}, {});

  std::vector<Location> refs;
  for (int ty = 0; ty < n; ty += cfg.ref_stride)
    for (int tx = 0; tx < n; tx += cfg.ref_stride) {
      const Location p = at(tx, ty);
      if (!point_in_barrier(p, doors)) refs.push_back(p);
    }
  const Ordering ord = order_reference(refs, OrderStrategy::by_y);
  const ReferenceDag dag =
      build_reference_dag(apply_ordering(refs, ord), cfg.m, doors);
  const SparseGpFactors f = assemble_precision(dag, cfg.spec);

  auto probe = [&](const Location& a, const Location& b) {
    ProbePair pp;
    pp.a = a;
    pp.b = b;
    pp.dist = distance(a, b);
    pp.dag_cov = nonstationary_cov(a, b, dag, f, doors);
    pp.base = base_cov(pp.dist, cfg.spec);
    return pp;
  };

  DoorsResult out;
  out.k = static_cast<int>(refs.size());
  out.across = probe(at(12, 40), at(12, 16));
  out.opening = probe(at(28, 40), at(28, 16));
  out.offgrid = probe(at(11, 39), at(11, 17));
  out.nearby = probe(at(11, 39), at(12, 40));

  if (!cfg.outdir.empty()) {
    ensure_dir(cfg.outdir);
    std::ofstream fcsv(cfg.outdir + "/doors_field.csv");
    fcsv << "x,y,dag_cov,base_cov\n";
    fcsv.precision(17);
    const Location& origin = out.across.a;
    for (int ty = 0; ty < n; ++ty)
      for (int tx = 0; tx < n; ++tx) {
        const Location p = at(tx, ty);
        if (point_in_barrier(p, doors)) continue;
        fcsv << p.x << ',' << p.y << ','
             << nonstationary_cov(p, origin, dag, f, doors) << ','
             << base_cov(distance(p, origin), cfg.spec) << '\n';
      }
    write_edges_csv(cfg.outdir + "/doors_edges.csv", dag);
  }
  return out;
}

OrderingResult run_ordering_study(const OrderingConfig& cfg) {
  const int n = cfg.grid_n;
  const Polyline fault = {
      {5.37, 0.41}, {5.03, 3.07}, {4.81, 6.13}, {5.29, 9.57}};
  const BarrierSet b({}, {fault});
  const std::vector<Location> grid = square_grid(n, 0.0, 10.0);
  const int total = n * n;

  const Ordering truth_ord = order_reference(grid, OrderStrategy::by_y);
  const ReferenceDag truth_dag =
      build_reference_dag(apply_ordering(grid, truth_ord), cfg.m, b);
  const CovarianceSpec truth_spec{cfg.sigma2, cfg.phi, cfg.nu};
  const SparseGpFactors truth_f = assemble_precision(truth_dag, truth_spec);
  const std::vector<int> inv = inverse_perm(truth_ord.perm);

  Rng rng_w = Rng::derive(cfg.seed, 1);
  Rng rng_e = Rng::derive(cfg.seed, 2);
  const Eigen::VectorXd w_ord = sample_prior_w(truth_dag, truth_f, rng_w);
  Eigen::VectorXd y(total);
  for (int g = 0; g < total; ++g)
    y[g] = cfg.beta0 + w_ord[inv[g]] + std::sqrt(cfg.tau2) * rng_e.normal();

  std::vector<int> train_ids, test_ids;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int g = iy * n + ix;
      if (ix % cfg.train_stride == 0 && iy % cfg.train_stride == 0)
        train_ids.push_back(g);
      else
        test_ids.push_back(g);
    }
  Dataset train, test;
  auto take = [&](const std::vector<int>& ids, Dataset* d) {
    d->y.resize(static_cast<Eigen::Index>(ids.size()));
    d->X.resize(static_cast<Eigen::Index>(ids.size()), 0);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      d->locations.push_back(grid[ids[t]]);
      d->y[static_cast<Eigen::Index>(t)] = y[ids[t]];
    }
  };
  take(train_ids, &train);
  take(test_ids, &test);

  PriorSpec priors;
  const double h = distance(grid.front(), grid.back());
  const double xstar = matern_decay_distance(cfg.nu, 1.0, 0.05);
  priors.phi_lower = xstar / (0.75 * h);
  priors.phi_upper = xstar / (0.25 * h);

  McmcConfig mc;
  mc.iterations = cfg.iterations;
  mc.burn_in = cfg.burn_in;
  mc.thin = cfg.thin;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  CovarianceSpec init{1.0, cfg.phi, cfg.nu};
  starting_values(train, cfg.nu, &init, &mc);

  OrderingResult out;
  const std::pair<const char*, OrderStrategy> tries[] = {
      {"x", OrderStrategy::by_x},
      {"y", OrderStrategy::by_y},
      {"sum", OrderStrategy::by_sum}};
  for (const auto& [name, strategy] : tries) {
    const Ordering ord = order_reference(train.locations, strategy);
    const Dataset train_ord = ordered_dataset(train, ord);
    const ReferenceDag dag =
        build_reference_dag(train_ord.locations, cfg.m, b);
    const McmcChain chain = gibbs_fit(train_ord, dag, init, priors, mc);
    const PredictionResult pred = predict(chain, dag, b, test.locations,
                                          test.X, cfg.seed, cfg.threads);
    out.names.push_back(name);
    out.rmspe.push_back(score(pred, test.y).rmspe);
  }
  out.spread = *std::max_element(out.rmspe.begin(), out.rmspe.end()) -
               *std::min_element(out.rmspe.begin(), out.rmspe.end());

  if (!cfg.outdir.empty()) {
    ensure_dir(cfg.outdir);
    std::ofstream f(cfg.outdir + "/ordering_rmspe.csv");
    f << "ordering,rmspe\n";
    f.precision(17);
    for (std::size_t i = 0; i < out.names.size(); ++i)
      f << out.names[i] << ',' << out.rmspe[i] << '\n';
  }
  return out;
}

}  // namespace bora
