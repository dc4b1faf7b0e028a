// End-to-end acceptance checks. Each criterion prints one line; the process
// exits nonzero if any fail.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bora/covariance.hpp"
#include "bora/dag.hpp"
#include "bora/errors.hpp"
#include "bora/experiments.hpp"
#include "bora/geometry.hpp"
#include "bora/metrics.hpp"
#include "bora/model.hpp"
#include "bora/rng.hpp"
#include "oracles.hpp"

using namespace bora;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

int pick(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

// unique lattice points, coordinates exact in double
std::vector<Location> unique_lattice(Rng& rng, int n, int ix_lo, int ix_hi,
                                     int iy_lo, int iy_hi) {
  std::set<std::pair<long, long>> seen;
  std::vector<Location> pts;
  while (static_cast<int>(pts.size()) < n) {
    const long ix = pick(rng, ix_lo, ix_hi);
    const long iy = pick(rng, iy_lo, iy_hi);
    if (!seen.insert({ix, iy}).second) continue;
    pts.push_back(oracle::lat(ix, iy));
  }
  return pts;
}

double ess_of_row(const Eigen::MatrixXd& draws, int row) {
  const Eigen::VectorXd v = draws.row(row).transpose();
  return effective_sample_size(v.data(), static_cast<int>(v.size()));
}

// ---------------------------------------------------------------------------

void faults_criteria() {
  FaultsConfig cfg;  // defaults: 5 replicates, 67x67 grid, 6000 iterations
  const FaultsResult res = run_faults_experiment(cfg);

  const bool beta_ok = std::abs(res.mean_beta1 - 0.5) <= 0.05;
  const bool tau_ok = std::abs(res.mean_tau2 - 0.1) <= 0.03;
  const bool micro_ok = res.mean_micro >= 30.0 && res.mean_micro <= 98.0;
  const bool rmspe_ok =
      res.mean_rmspe_barrier >= 0.34 && res.mean_rmspe_barrier <= 0.40;
  const bool cov_ok = res.mean_coverage_barrier >= 0.90 &&
                      res.mean_coverage_barrier <= 0.98;
  report("fault study recovers the generating parameters",
         beta_ok && tau_ok && micro_ok && rmspe_ok && cov_ok,
         "beta1 " + fmt(res.mean_beta1) + " (true 0.5 +-0.05), tau2 " +
             fmt(res.mean_tau2) + " (true 0.1 +-0.03), microergodic " +
             fmt(res.mean_micro, 1) + " (in [30,98]), rmspe " +
             fmt(res.mean_rmspe_barrier) + " (in [0.34,0.40]), coverage " +
             fmt(res.mean_coverage_barrier) + " (in [0.90,0.98])");

  report("barrier-aware fit predicts better than the stationary fit",
         res.mean_rmspe_barrier < res.mean_rmspe_plain,
         "rmspe " + fmt(res.mean_rmspe_barrier) + " vs " +
             fmt(res.mean_rmspe_plain) + " ignoring the faults");
}

void nn_reduction_criterion() {
  Rng rng(1001);
  const BarrierSet none;
  const OrderStrategy strategies[4] = {
      OrderStrategy::by_x, OrderStrategy::by_y, OrderStrategy::by_sum,
      OrderStrategy::by_product_desc};
  long edges = 0, mismatches = 0;
  for (int c = 0; c < 100; ++c) {
    const int n = pick(rng, 1, 80);
    const int m = 1 + c % 12;
    std::vector<Location> pts = unique_lattice(rng, n, 0, 256, 0, 256);
    pts = apply_ordering(pts, order_reference(pts, strategies[c % 4]));
    const ReferenceDag dag = build_reference_dag(pts, m, none);
    if (!dag.escapes.empty()) ++mismatches;
    for (int i = 0; i < n; ++i) {
      const std::vector<int> want = oracle::knn_earlier(pts, i, m);
      const NeighborList& nl = dag.nbrs[i];
      bool same = nl.idx.size() == want.size();
      for (std::size_t t = 0; same && t < want.size(); ++t)
        same = nl.idx[t] == want[t] &&
               nl.dist[t] == distance(pts[i], pts[want[t]]) &&
               nl.prov[t] == Provenance::first_order && nl.via[t] == -1;
      if (!same) ++mismatches;
      edges += static_cast<long>(nl.idx.size());
    }
  }
  report("neighbor search without barriers equals plain nearest neighbors",
         mismatches == 0,
         "100 configurations, " + std::to_string(edges) +
             " edges byte-compared, " + std::to_string(mismatches) +
             " mismatches");
}

void saturated_dense_criterion() {
  Rng rng(2002);
  std::vector<Location> pts = unique_lattice(rng, 20, 0, 192, 0, 192);
  pts = apply_ordering(pts, order_reference(pts, OrderStrategy::by_y));
  const BarrierSet none;
  const ReferenceDag dag = build_reference_dag(pts, 19, none);
  const CovarianceSpec spec{1.3, 1.7, 1.2};
  const SparseGpFactors f = assemble_precision(dag, spec);
  const Eigen::MatrixXd ct = oracle::dense_ctilde(f);
  const Eigen::MatrixXd cd = oracle::dense_cov(pts, spec);
  const double err = (ct - cd).cwiseAbs().maxCoeff();
  report("saturated neighbor sets reproduce the dense covariance", err <= 1e-8,
         "k=20, m=19, max abs deviation " + sci(err) + " (tol 1e-8)");
}

void spd_criterion() {
  Rng rng(3003);
  long escape_edges = 0;
  int spd_ok = 0, var_ok = 0;
  const int total = 100;
  for (int c = 0; c < total; ++c) {
    BarrierSet b;
    std::vector<Location> pts;
    int m = pick(rng, 2, 6);
    const int type = c % 4;
    if (type == 0) {
      pts = unique_lattice(rng, pick(rng, m + 2, 40), 0, 128, 0, 128);
      pts = apply_ordering(pts, order_reference(pts, OrderStrategy::by_y));
    } else if (type == 1) {
      // horizontal wall with a gap; earliest nodes all below it
      b = BarrierSet({}, {{{-0.1, 1.0625}, {0.95, 1.0625}},
                          {{1.05, 1.0625}, {2.1, 1.0625}}});
      const int n = pick(rng, m + 2, 40);
      const int n_low = std::max(m + 1, n / 2);
      std::vector<Location> low =
          unique_lattice(rng, n_low, 0, 128, 0, 63);
      std::vector<Location> high =
          unique_lattice(rng, n - n_low, 0, 128, 72, 128);
      pts = low;
      pts.insert(pts.end(), high.begin(), high.end());
      pts = apply_ordering(pts, order_reference(pts, OrderStrategy::by_y));
    } else if (type == 2) {
      b = BarrierSet({{{{0.8, 1.3}, {1.2, 1.3}, {1.2, 1.7}, {0.8, 1.7}}, {}}},
                     {});
      const int n = pick(rng, m + 2, 40);
      std::vector<Location> low =
          unique_lattice(rng, m + 1, 0, 128, 0, 76);
      std::set<std::pair<long, long>> seen;
      pts = low;
      while (static_cast<int>(pts.size()) < n) {
        const long ix = pick(rng, 0, 128), iy = pick(rng, 0, 128);
        if (!seen.insert({ix, iy}).second) continue;
        const Location p = oracle::lat(ix, iy);
        if (point_in_barrier(p, b)) continue;
        if (std::find(pts.begin(), pts.end(), p) != pts.end()) continue;
        pts.push_back(p);
      }
      pts = apply_ordering(pts, order_reference(pts, OrderStrategy::by_y));
    } else {
      // wall the last node cannot see around: forces a lattice escape
      b = BarrierSet({}, {{{0.5, -3.0}, {0.5, 3.0}}});
      pts = {{0.0, -1.0}, {0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
      m = 2;
    }
    const ReferenceDag dag = build_reference_dag(pts, m, b);
    for (const NeighborList& nl : dag.nbrs)
      for (Provenance pr : nl.prov)
        if (pr == Provenance::grid_escape) ++escape_edges;
    const CovarianceSpec spec{0.5 + 1.5 * rng.uniform(),
                              0.5 + 2.5 * rng.uniform(),
                              c % 3 == 0 ? 0.5 + c % 5
                                         : 0.3 + 2.7 * rng.uniform()};
    const SparseGpFactors f = assemble_precision(dag, spec);
    if (f.cond_var.minCoeff() > 0.0 && f.cond_var.allFinite()) ++var_ok;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(f.precision());
    if (llt.info() == Eigen::Success) ++spd_ok;
  }
  report("barrier precision matrices stay positive definite",
         spd_ok == total && var_ok == total && escape_edges > 0,
         std::to_string(spd_ok) + "/" + std::to_string(total) +
             " Cholesky factorizations succeeded, " + std::to_string(var_ok) +
             "/" + std::to_string(total) + " with positive conditional " +
             "variances, " + std::to_string(escape_edges) +
             " escape edges exercised");
}

void geometry_oracle_criterion() {
  Rng rng(606);
  auto rand_ipt = [&] {
    return oracle::IPt{pick(rng, -256, 256) * 2L, pick(rng, -256, 256) * 2L};
  };
  auto from_ipt = [](const oracle::IPt& p) {
    return Location{static_cast<double>(p.x) / 128.0,
                    static_cast<double>(p.y) / 128.0};
  };
  long cases = 0, bad = 0;

  for (int it = 0; it < 35000; ++it) {
    oracle::IPt a = rand_ipt(), b = rand_ipt(), c = rand_ipt();
    if (it % 3 == 0) {  // force collinear triples
      const long t = pick(rng, -3, 3);
      c = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    ++cases;
    if (orient(from_ipt(a), from_ipt(b), from_ipt(c)) !=
        oracle::iorient(a, b, c))
      ++bad;
  }
  for (int it = 0; it < 15000; ++it) {
    oracle::IPt a = rand_ipt(), b = rand_ipt(), c = rand_ipt();
    if (it % 2 == 0) {
      const long t = pick(rng, -2, 2);
      c = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    ++cases;
    if (on_segment(from_ipt(a), from_ipt(b), from_ipt(c)) !=
        oracle::ion_segment(a, b, c))
      ++bad;
  }
  for (int it = 0; it < 25000; ++it) {
    oracle::IPt p = rand_ipt(), q = rand_ipt(), a = rand_ipt(),
                b = rand_ipt();
    if (it % 3 == 0) {  // collinear families
      const long t1 = pick(rng, -2, 2), t2 = pick(rng, -2, 2);
      a = {p.x + t1 * (q.x - p.x), p.y + t1 * (q.y - p.y)};
      b = {p.x + t2 * (q.x - p.x), p.y + t2 * (q.y - p.y)};
    } else if (it % 7 == 0) {
      a = p;  // shared endpoint
    }
    ++cases;
    if (segments_cross_or_overlap(from_ipt(p), from_ipt(q), from_ipt(a),
                                  from_ipt(b)) !=
        oracle::icross_or_overlap(p, q, a, b))
      ++bad;
  }

  const Polygon box_with_hole{
      {{-2.0, -2.0}, {2.0, -2.0}, {2.0, 2.0}, {-2.0, 2.0}},
      {{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}}};
  const Polygon triangle{{{-3.5, 2.5}, {-2.5, 2.5}, {-3.0, 3.5}}, {}};
  const BarrierSet b({box_with_hole, triangle},
                     {{{2.5, -3.0}, {2.5, 0.0}, {3.5, 0.5}},
                      {{-3.0, -3.0}, {-3.0, -2.5}}});
  for (int it = 0; it < 25000; ++it) {
    const Location p = oracle::lat(pick(rng, -256, 256), pick(rng, -256, 256));
    const Location q = oracle::lat(pick(rng, -256, 256), pick(rng, -256, 256));
    ++cases;
    if (segment_blocked(p, q, b) != oracle::isegment_blocked(p, q, b)) ++bad;
  }

  report("floating-point geometry agrees with exact integer arithmetic",
         cases >= 100000 && bad == 0,
         std::to_string(cases) + " cases, " + std::to_string(bad) +
             " disagreements");
}

void gibbs_posterior_criterion() {
  Rng rng(7007);
  const int k = 50, m = 6;
  std::vector<Location> pts = unique_lattice(rng, k, 0, 256, 0, 256);
  pts = apply_ordering(pts, order_reference(pts, OrderStrategy::by_y));
  const BarrierSet none;
  const ReferenceDag dag = build_reference_dag(pts, m, none);
  const CovarianceSpec spec{1.0, 2.0, 1.5};
  const SparseGpFactors f = assemble_precision(dag, spec);
  Rng wrng(7008);
  const Eigen::VectorXd w = sample_prior_w(dag, f, wrng);
  const double beta0 = 0.7, tau2 = 0.09;
  Dataset data;
  data.locations = pts;
  data.y.resize(k);
  for (int i = 0; i < k; ++i)
    data.y[i] = beta0 + w[i] + std::sqrt(tau2) * wrng.normal();
  data.X.resize(k, 0);

  PriorSpec priors;
  priors.phi_lower = 1.5;
  priors.phi_upper = 2.5;  // midpoint pins phi at 2.0
  McmcConfig mc;
  mc.iterations = 24000;
  mc.burn_in = 4000;
  mc.thin = 1;
  mc.seed = 424242;
  mc.tau2_init = tau2;
  mc.sample_tau2 = false;
  mc.sample_sigma2 = false;
  mc.sample_phi = false;
  const McmcChain chain = gibbs_fit(data, dag, spec, priors, mc);
  const int T = chain.draws();

  // closed form: flat prior on beta0, gaussian prior on w
  const Eigen::MatrixXd ct = oracle::dense_ctilde(f);
  const Eigen::MatrixXd ct_inv =
      ct.llt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd Q(k + 1, k + 1);
  Q(0, 0) = k / tau2;
  for (int i = 0; i < k; ++i) {
    Q(0, i + 1) = 1.0 / tau2;
    Q(i + 1, 0) = 1.0 / tau2;
  }
  Q.block(1, 1, k, k) =
      ct_inv + Eigen::MatrixXd::Identity(k, k) / tau2;
  Eigen::VectorXd rhs(k + 1);
  rhs(0) = data.y.sum() / tau2;
  rhs.tail(k) = data.y / tau2;
  const Eigen::MatrixXd cov =
      Q.ldlt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
  const Eigen::VectorXd mean = cov * rhs;

  double max_z = 0.0;
  int arg = -1;
  for (int j = 0; j <= k; ++j) {
    const double chain_mean =
        j == 0 ? chain.beta.row(0).mean() : chain.w.row(j - 1).mean();
    const double ess = j == 0 ? ess_of_row(chain.beta, 0)
                              : ess_of_row(chain.w, j - 1);
    const double se = std::sqrt(cov(j, j)) / std::sqrt(ess);
    const double z = std::abs(chain_mean - mean[j]) / se;
    if (z > max_z) {
      max_z = z;
      arg = j;
    }
  }
  report("gibbs sampler matches the closed-form posterior", max_z <= 3.0,
         std::to_string(T) + " draws, max |z| over beta0 and " +
             std::to_string(k) + " w components = " + fmt(max_z, 2) +
             " (component " + std::to_string(arg) + ", tol 3 posterior SE)");
}

void doors_criterion() {
  const DoorsResult res = run_doors_demo({});
  const double ratio = res.nearby.dag_cov / res.nearby.base;
  const bool ok = res.k == 189 && res.across.dag_cov < res.across.base &&
                  res.offgrid.dag_cov < res.offgrid.base &&
                  res.opening.dag_cov > res.across.dag_cov && ratio >= 0.98 &&
                  ratio <= 1.02;
  report("wall demo decorrelates blocked pairs only",
         ok,
         "k=" + std::to_string(res.k) + ", across " + fmt(res.across.dag_cov) +
             " < base " + fmt(res.across.base) + ", off-grid " +
             fmt(res.offgrid.dag_cov) + " < base " + fmt(res.offgrid.base) +
             ", opening " + fmt(res.opening.dag_cov) + " > across, nearby " +
             "ratio " + fmt(ratio));
}

void bessel_criterion() {
  Rng rng(909);
  const double lx_lo = std::log(1e-3), lx_hi = std::log(20.0);
  double max_rel = 0.0;
  long skipped = 0;
  for (int it = 0; it < 10000; ++it) {
    double nu;
    switch (it % 4) {
      case 0: nu = 0.5; break;
      case 1: nu = 1.5; break;
      case 2: nu = 2.5; break;
      default: nu = 0.3 + 2.7 * rng.uniform();
    }
    const double x = std::exp(lx_lo + (lx_hi - lx_lo) * rng.uniform());

    const long double kw = oracle::integral_bessel_k(nu, x);
    const double krel =
        std::abs(static_cast<double>((bessel_k(nu, x) - kw) / kw));
    max_rel = std::max(max_rel, krel);

    const long double mw = oracle::integral_matern(nu, x);
    if (mw < 1e-280L) {
      ++skipped;
      continue;
    }
    const double mrel = std::abs(
        static_cast<double>((matern_corr(x, nu) - mw) / mw));
    max_rel = std::max(max_rel, mrel);
  }
  report("bessel and matern values match high-precision quadrature",
         max_rel <= 1e-10,
         "10000 (nu, x) pairs, max relative error " + sci(max_rel) +
             " (tol 1e-10), " + std::to_string(skipped) +
             " underflow points skipped");
}

void score_criterion() {
  Eigen::VectorXd mean(3), truth(3), lo(3), hi(3);
  mean << 1, -1, 2;
  truth << 0, 0, 0;
  lo << 0, -2, 1;
  hi << 2, 0, 3;
  const Scores s = score(mean, lo, hi, truth);
  const bool hand = s.rmspe == std::sqrt(2.0) && s.mape == 4.0 / 3.0 &&
                    s.coverage == 2.0 / 3.0 && s.ci_width == 2.0 && s.n == 3;

  const Scores perfect = score(truth, truth, truth, truth);
  const bool degenerate = perfect.rmspe == 0.0 && perfect.mape == 0.0 &&
                          perfect.coverage == 1.0 && perfect.ci_width == 0.0;
  report("hand-computed scores match exactly", hand && degenerate,
         "rmspe " + fmt(s.rmspe) + ", mape " + fmt(s.mape) + ", coverage " +
             fmt(s.coverage) + ", width " + fmt(s.ci_width) +
             "; exact equality");
}

void ordering_criterion() {
  const OrderingResult res = run_ordering_study({});
  std::string detail = "rmspe";
  for (std::size_t i = 0; i < res.names.size(); ++i)
    detail += " " + res.names[i] + "=" + fmt(res.rmspe[i]);
  detail += ", spread " + fmt(res.spread, 5) + " (tol 0.005)";
  report("prediction quality is insensitive to the coordinate ordering",
         res.spread < 0.005, detail);
}

}  // namespace

int main() {
  faults_criteria();
  nn_reduction_criterion();
  saturated_dense_criterion();
  spd_criterion();
  geometry_oracle_criterion();
  gibbs_posterior_criterion();
  doors_criterion();
  bessel_criterion();
  score_criterion();
  ordering_criterion();
  std::printf("%d of 11 acceptance criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
