#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bora/geometry.hpp"
#include "bora/kdtree.hpp"

namespace bora {

enum class OrderStrategy { by_x, by_y, by_sum, by_product_desc, explicit_file };

struct Ordering {
  OrderStrategy strategy = OrderStrategy::by_y;
  std::vector<int> perm;  // perm[visit position] = original index
};

Ordering order_reference(const std::vector<Location>& locs, OrderStrategy s);

// Validates that perm is a bijection on [0, n).
Ordering explicit_ordering(std::vector<int> perm, std::size_t n);

std::vector<Location> apply_ordering(const std::vector<Location>& locs,
                                     const Ordering& ord);

enum class Provenance { first_order, second_order, grid_escape };

const char* provenance_name(Provenance p);

struct NeighborList {
  std::vector<int> idx;          // earlier-node indices, selection order
  std::vector<Provenance> prov;  // one per neighbor
  std::vector<int> via;          // detour node for second_order, else -1
  std::vector<double> dist;      // Euclidean distance to the target
};

struct ReferenceDag {
  std::vector<Location> refs;  // in DAG order
  int m = 0;
  std::vector<NeighborList> nbrs;

  struct EscapeRecord {
    int node = -1;
    Location grid_point;  // first lattice point that yielded proxies
    EscapeGrid grid;
  };
  std::vector<EscapeRecord> escapes;

  KdTree tree;  // over refs, built once

  // Index of an exactly matching reference, -1 when absent.
  int find_ref(const Location& p) const;

  std::unordered_map<std::uint64_t, std::vector<int>> coord_index;
};

// Neighbor search over an ordered reference set. Nodes see only earlier
// nodes; edges never cross barriers. Isolated nodes fall back to proxy
// neighbors through an escape lattice.
ReferenceDag build_reference_dag(const std::vector<Location>& refs_ordered,
                                 int m, const BarrierSet& b);

struct ScoredCandidate {
  int idx = -1;
  double score = 0;  // detour length minus direct distance
  int via = -1;
};

// Detour-scored fill candidates for node i given its current neighbor list.
std::vector<ScoredCandidate> second_order_candidates(const ReferenceDag& dag,
                                                     const BarrierSet& b,
                                                     int i);

struct NonRefNeighbors {
  std::vector<int> idx;
  std::vector<Provenance> prov;
  std::vector<int> via;
  std::vector<double> dist;
};

// Neighbors of an off-dag location among the whole reference set. The fill
// pool contributed by each first-order neighbor r_j is every reference with
// an unblocked segment to r_j, so the pool does not depend on the reference
// ordering.
NonRefNeighbors nonref_neighbors(const Location& u, const ReferenceDag& dag,
                                 const BarrierSet& b);

}  // namespace bora
