#pragma once

// Directed networks on a small labelled node set, stored as a dyad bitset.
//
// Dyads are indexed row-major over ordered pairs with the diagonal skipped:
// (0,1) -> 0, (0,2) -> 1, ..., (1,0) -> N-1, (1,2) -> N, ...
// The same index is the bit position inside Network::bits(), and the
// integer value of the bitset is the network's state index. Every file
// format in the project relies on this ordering.

#include <compare>
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace netform {

using StateIndex = std::uint64_t;

inline constexpr int kMaxNodes = 8;           // 56 dyad bits
inline constexpr int kDefaultCapLog2 = 20;    // exhaustive state-space cap

struct Dyad {
  int i = 0;
  int j = 0;
  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

constexpr int dyad_count(int n_nodes) { return n_nodes * (n_nodes - 1); }

/// Throws InvalidArgument unless i != j and both lie in [0, n_nodes).
void validate_dyad(Dyad d, int n_nodes);

/// Canonical index of a (valid) dyad.
constexpr int dyad_index(Dyad d, int n_nodes) {
  return d.i * (n_nodes - 1) + (d.j < d.i ? d.j : d.j - 1);
}

/// Inverse of dyad_index.
constexpr Dyad dyad_at(int index, int n_nodes) {
  const int i = index / (n_nodes - 1);
  const int r = index % (n_nodes - 1);
  return Dyad{i, r < i ? r : r + 1};
}

std::vector<Dyad> all_dyads(int n_nodes);

class Network {
 public:
  /// Empty network on n_nodes nodes (2 <= n_nodes <= kMaxNodes).
  explicit Network(int n_nodes);
  Network(int n_nodes, std::uint64_t bits);

  int n_nodes() const { return n_nodes_; }
  std::uint64_t bits() const { return bits_; }
  StateIndex index() const { return bits_; }

  bool has(Dyad d) const;
  bool has_index(int dyad_idx) const { return (bits_ >> dyad_idx) & 1u; }
  int size() const;
  bool empty() const { return bits_ == 0; }

  /// sigma_ij: the network with dyad d toggled.
  Network switched(Dyad d) const;
  Network switched_index(int dyad_idx) const {
    return Network(n_nodes_, bits_ ^ (std::uint64_t{1} << dyad_idx), Unchecked{});
  }

  std::vector<Dyad> links() const;

  /// Bits of the dyads leaving node i, shifted down to [0, N-1).
  std::uint64_t out_bits(int i) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  struct Unchecked {};
  Network(int n_nodes, std::uint64_t bits, Unchecked) : n_nodes_(n_nodes), bits_(bits) {}

  int n_nodes_;
  std::uint64_t bits_;
};

/// Free-function form of Network::switched; validates the dyad.
Network switch_link(const Network& g, Dyad d);

/// S_i(g): the links of g whose source is i.
Network out_subgraph(const Network& g, int i);

/// "g:<lowercase hex>" encoding used in every CSV.
std::string to_hex(const Network& g);
Network network_from_hex(std::string_view text, int n_nodes);

/// Number of networks on n_nodes nodes: 2^{N(N-1)}. Throws StateSpaceOverflow
/// when N(N-1) exceeds cap_log2.
StateIndex state_count(int n_nodes, int cap_log2 = kDefaultCapLog2);

/// All networks on n_nodes nodes in increasing state-index order.
class NetworkRange {
 public:
  class iterator {
   public:
    using value_type = Network;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    iterator(int n_nodes, StateIndex at) : n_nodes_(n_nodes), at_(at) {}
    Network operator*() const { return Network(n_nodes_, at_); }
    iterator& operator++() {
      ++at_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++at_;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.at_ == b.at_; }

   private:
    int n_nodes_ = 2;
    StateIndex at_ = 0;
  };

  NetworkRange(int n_nodes, StateIndex count) : n_nodes_(n_nodes), count_(count) {}
  iterator begin() const { return {n_nodes_, 0}; }
  iterator end() const { return {n_nodes_, count_}; }
  StateIndex size() const { return count_; }
  Network operator[](StateIndex k) const { return Network(n_nodes_, k); }

 private:
  int n_nodes_;
  StateIndex count_;
};

NetworkRange enumerate_networks(int n_nodes, int cap_log2 = kDefaultCapLog2);

/// Partition of agents into types.
///
/// Finite mode carries an explicit node -> type assignment; asymptotic mode
/// carries only the limiting type weights.
class TypeProfile {
 public:
  static TypeProfile from_assignment(std::vector<int> assignment, int n_types);
  /// Contiguous blocks: group r holds sizes[r] consecutive nodes.
  static TypeProfile from_group_sizes(const std::vector<int>& sizes);
  static TypeProfile from_weights(std::vector<double> weights);

  bool finite() const { return !assignment_.empty(); }
  int n_types() const { return n_types_; }
  int n_nodes() const { return static_cast<int>(assignment_.size()); }
  int type_of(int node) const { return assignment_.at(node); }
  const std::vector<int>& assignment() const { return assignment_; }
  /// N_r (finite mode only).
  std::vector<int> group_sizes() const;
  /// w_r; in finite mode N_r / N.
  std::vector<double> weights() const;

 private:
  TypeProfile() = default;
  int n_types_ = 0;
  std::vector<int> assignment_;
  std::vector<double> weights_;
};

/// d_i^out: entry r counts j with ij in g and type(j) = r.
std::vector<int> typed_outdegrees(const Network& g, int i, const TypeProfile& tp);

}  // namespace netform
