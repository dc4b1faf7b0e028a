#include "bora/dag.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <unordered_set>

namespace bora {

namespace {

std::uint64_t coord_hash(const Location& p) {
  const double x = p.x == 0.0 ? 0.0 : p.x;  // fold -0.0 into +0.0
  const double y = p.y == 0.0 ? 0.0 : p.y;
  const std::uint64_t hx = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t hy = std::bit_cast<std::uint64_t>(y);
  return hx * 0x9E3779B97F4A7C15ULL ^ (hy + 0xBF58476D1CE4E5B9ULL + (hx << 6));
}

}  // namespace

int ReferenceDag::find_ref(const Location& p) const {
  const auto it = coord_index.find(coord_hash(p));
  if (it == coord_index.end()) return -1;
  for (int i : it->second)
    if (refs[i] == p) return i;
  return -1;
}

namespace {

double order_key(const Location& p, OrderStrategy s) {
  switch (s) {
    case OrderStrategy::by_x: return p.x;
    case OrderStrategy::by_y: return p.y;
    case OrderStrategy::by_sum: return p.x + p.y;
    case OrderStrategy::by_product_desc: return -(p.x * p.y);
    default: throw InvalidSpec("ordering strategy has no coordinate key");
  }
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::first_order: return "first_order";
    case Provenance::second_order: return "second_order";
    case Provenance::grid_escape: return "grid_escape";
  }
  return "?";
}

Ordering order_reference(const std::vector<Location>& locs, OrderStrategy s) {
  if (s == OrderStrategy::explicit_file)
    throw InvalidSpec("explicit ordering requires a permutation");
  for (const Location& p : locs)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw NonFinite("ordering: non-finite coordinate");
  Ordering ord;
  ord.strategy = s;
  ord.perm.resize(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i) ord.perm[i] = static_cast<int>(i);
  std::stable_sort(ord.perm.begin(), ord.perm.end(), [&](int a, int b) {
    return order_key(locs[a], s) < order_key(locs[b], s);
  });
  return ord;
}

Ordering explicit_ordering(std::vector<int> perm, std::size_t n) {
  if (perm.size() != n)
    throw InvalidPermutation("permutation length does not match point count");
  std::vector<char> seen(n, 0);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v])
      throw InvalidPermutation("permutation is not a bijection on [0, n)");
    seen[v] = 1;
  }
  Ordering ord;
  ord.strategy = OrderStrategy::explicit_file;
  ord.perm = std::move(perm);
  return ord;
}

std::vector<Location> apply_ordering(const std::vector<Location>& locs,
                                     const Ordering& ord) {
  if (ord.perm.size() != locs.size())
    throw InvalidPermutation("ordering does not match point count");
  std::vector<Location> out;
  out.reserve(locs.size());
  for (int idx : ord.perm) out.push_back(locs[idx]);
  return out;
}

namespace {

void validate_refs(const std::vector<Location>& refs, int m,
                   const BarrierSet& b) {
  if (refs.empty()) throw InvalidSpec("reference set is empty");
  if (m < 1) throw InvalidSpec("neighbor cap m must be at least 1");
  for (const Location& p : refs) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw NonFinite("reference location with non-finite coordinate");
    if (point_in_barrier(p, b))
      throw LocationInBarrier("reference location inside a barrier");
  }
  std::vector<Location> sorted = refs;
  std::sort(sorted.begin(), sorted.end(), [](const Location& a, const Location& c) {
    return a.x != c.x ? a.x < c.x : a.y < c.y;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1])
      throw InvalidSpec("duplicate reference locations; deduplicate at ingest");
}

struct CandidateScore {
  double score;
  int via;
};

// Detour fill shared by reference and non-reference searches. `leg_ok`
// reports whether via->candidate is unblocked.
template <typename LegOk>
std::vector<ScoredCandidate> score_candidates(
    const Location& target, const std::vector<Location>& refs,
    const std::vector<int>& current, const std::vector<int>& pool_of, LegOk leg_ok,
    const std::vector<std::vector<int>>& pools) {
  std::map<int, CandidateScore> best;
  std::unordered_set<int> have(current.begin(), current.end());
  for (std::size_t jslot = 0; jslot < pool_of.size(); ++jslot) {
    const int j = pool_of[jslot];
    const double d_tj = distance(target, refs[j]);
    for (int c : pools[jslot]) {
      if (have.count(c)) continue;
      if (!leg_ok(j, c)) continue;
      const double score = d_tj + distance(refs[j], refs[c]) - distance(target, refs[c]);
      auto it = best.find(c);
      if (it == best.end() || score < it->second.score)
        best[c] = {score, j};
    }
  }
  std::vector<ScoredCandidate> out;
  out.reserve(best.size());
  for (const auto& [c, sc] : best) out.push_back({c, sc.score, sc.via});
  std::sort(out.begin(), out.end(), [](const ScoredCandidate& a,
                                       const ScoredCandidate& b) {
    return a.score != b.score ? a.score < b.score : a.idx < b.idx;
  });
  return out;
}

}  // namespace

std::vector<ScoredCandidate> second_order_candidates(const ReferenceDag& dag,
                                                     const BarrierSet& b,
                                                     int i) {
  const NeighborList& nl = dag.nbrs.at(i);
  std::vector<int> pool_of = nl.idx;
  std::vector<std::vector<int>> pools;
  pools.reserve(pool_of.size());
  for (int j : pool_of) pools.push_back(dag.nbrs[j].idx);
  auto leg_ok = [&](int j, int c) {
    return !segment_blocked(dag.refs[j], dag.refs[c], b);
  };
  return score_candidates(dag.refs[i], dag.refs, nl.idx, pool_of, leg_ok, pools);
}

ReferenceDag build_reference_dag(const std::vector<Location>& refs_ordered,
                                 int m, const BarrierSet& b) {
  validate_refs(refs_ordered, m, b);
  ReferenceDag dag;
  dag.refs = refs_ordered;
  dag.m = m;
  const int k = static_cast<int>(refs_ordered.size());
  dag.nbrs.resize(k);
  dag.tree = KdTree(dag.refs);
  for (int i = 0; i < k; ++i)
    dag.coord_index[coord_hash(dag.refs[i])].push_back(i);

  // Algorithm note: the first m+1 nodes condition on all earlier nodes, which
  // presumes the ordering keeps them mutually reachable.
  const int head = std::min(m + 1, k);
  for (int i = 1; i < head; ++i)
    for (int j = 0; j < i; ++j)
      if (segment_blocked(dag.refs[j], dag.refs[i], b))
        throw InvalidSpec(
            "the first m+1 ordered references must be mutually reachable; "
            "node " + std::to_string(i) + " is blocked from node " +
            std::to_string(j) + "; choose a different ordering");

  for (int i = 1; i < k; ++i) {
    NeighborList& nl = dag.nbrs[i];
    if (i <= m) {
      // all earlier nodes, nearest first
      std::vector<std::pair<double, int>> order;
      for (int j = 0; j < i; ++j) {
        const double dx = dag.refs[j].x - dag.refs[i].x;
        const double dy = dag.refs[j].y - dag.refs[i].y;
        order.emplace_back(dx * dx + dy * dy, j);
      }
      std::sort(order.begin(), order.end());
      for (const auto& [d2, j] : order) {
        nl.idx.push_back(j);
        nl.prov.push_back(Provenance::first_order);
        nl.via.push_back(-1);
        nl.dist.push_back(std::sqrt(d2));
      }
      continue;
    }

    // first-order pass: earlier nodes in distance order, unblocked only
    std::vector<std::pair<int, double>> nearest_any;  // first m regardless
    KdTree::NearestIterator it = dag.tree.nearest(dag.refs[i]);
    double d = 0;
    for (int c = it.next(&d); c >= 0; c = it.next(&d)) {
      if (c >= i) continue;
      if (static_cast<int>(nearest_any.size()) < m) nearest_any.emplace_back(c, d);
      if (!segment_blocked(dag.refs[c], dag.refs[i], b)) {
        nl.idx.push_back(c);
        nl.prov.push_back(Provenance::first_order);
        nl.via.push_back(-1);
        nl.dist.push_back(d);
        if (static_cast<int>(nl.idx.size()) == m) break;
      }
    }

    if (nl.idx.empty()) {
      // isolated node: escape lattice sized by the crossing neighbors
      double r_l = 0, d_l = 0;
      for (const auto& [c, dist_c] : nearest_any) {
        r_l = std::max(r_l, dist_c);
        const double ov = overlap_length(dag.refs[i], dag.refs[c], b);
        if (ov > 0 && (d_l == 0 || ov < d_l)) d_l = ov;
      }
      if (d_l <= 0) d_l = r_l / 10.0;  // zero-width barriers have no overlap
      d_l = std::max(d_l, r_l / 100.0);
      bool found = false;
      // the lattice doubles until a grid point reaches around the barrier
      for (int grow = 0; grow < 8 && !found; ++grow) {
        const double scale = static_cast<double>(1 << grow);
        const EscapeGrid grid =
            build_escape_grid(dag.refs[i], r_l * scale, d_l * scale);
        for (const Location& pt : grid.points) {
          if (segment_blocked(dag.refs[i], pt, b)) continue;
          // proxies: nearest earlier references the grid point can see
          KdTree::NearestIterator pit = dag.tree.nearest(pt);
          for (int c = pit.next(); c >= 0; c = pit.next()) {
            if (c >= i) continue;
            if (segment_blocked(dag.refs[c], pt, b)) continue;
            nl.idx.push_back(c);
            nl.prov.push_back(Provenance::grid_escape);
            nl.via.push_back(-1);
            nl.dist.push_back(distance(dag.refs[i], dag.refs[c]));
            if (static_cast<int>(nl.idx.size()) == m) break;
          }
          if (!nl.idx.empty()) {
            dag.escapes.push_back({i, pt, grid});
            found = true;
            break;
          }
        }
      }
      if (!found)
        throw IsolatedUnreachable("node " + std::to_string(i) +
                                  " has no reachable earlier node, even "
                                  "through the escape lattice");
    }

    // second-order fill from neighbors-of-neighbors, detour-scored
    for (int round = 0; round < 5 && static_cast<int>(nl.idx.size()) < m;
         ++round) {
      const std::vector<ScoredCandidate> cands =
          second_order_candidates(dag, b, i);
      if (cands.empty()) break;
      const int want = m - static_cast<int>(nl.idx.size());
      for (int t = 0; t < want && t < static_cast<int>(cands.size()); ++t) {
        nl.idx.push_back(cands[t].idx);
        nl.prov.push_back(Provenance::second_order);
        nl.via.push_back(cands[t].via);
        nl.dist.push_back(distance(dag.refs[i], dag.refs[cands[t].idx]));
      }
    }
  }
  return dag;
}

NonRefNeighbors nonref_neighbors(const Location& u, const ReferenceDag& dag,
                                 const BarrierSet& b) {
  if (!std::isfinite(u.x) || !std::isfinite(u.y))
    throw NonFinite("prediction location with non-finite coordinate");
  if (point_in_barrier(u, b))
    throw LocationInBarrier("prediction location inside a barrier");

  NonRefNeighbors out;
  const int k = static_cast<int>(dag.refs.size());
  const int m = std::min(dag.m, k);

  KdTree::NearestIterator it = dag.tree.nearest(u);
  double d = 0;
  for (int c = it.next(&d); c >= 0; c = it.next(&d)) {
    // a coincident reference is reachable by convention
    if (d == 0.0 || !segment_blocked(dag.refs[c], u, b)) {
      out.idx.push_back(c);
      out.prov.push_back(Provenance::first_order);
      out.via.push_back(-1);
      out.dist.push_back(d);
      if (static_cast<int>(out.idx.size()) == m) break;
    }
  }
  if (out.idx.empty())
    throw NoReachableNeighbor("prediction location cannot reach any reference");

  if (static_cast<int>(out.idx.size()) < m) {
    // pool per first-order neighbor: all references it can see
    const std::vector<int> pool_of = out.idx;
    std::vector<std::vector<int>> pools(pool_of.size());
    for (std::size_t s = 0; s < pool_of.size(); ++s) {
      const int j = pool_of[s];
      for (int t = 0; t < k; ++t)
        if (t != j && !segment_blocked(dag.refs[t], dag.refs[j], b))
          pools[s].push_back(t);
    }
    auto leg_ok = [](int, int) { return true; };  // pools are visibility-built
    const std::vector<ScoredCandidate> cands =
        score_candidates(u, dag.refs, out.idx, pool_of, leg_ok, pools);
    const int want = m - static_cast<int>(out.idx.size());
    for (int t = 0; t < want && t < static_cast<int>(cands.size()); ++t) {
      out.idx.push_back(cands[t].idx);
      out.prov.push_back(Provenance::second_order);
      out.via.push_back(cands[t].via);
      out.dist.push_back(distance(u, dag.refs[cands[t].idx]));
    }
  }
  return out;
}

}  // namespace bora
