#include "netform/network.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <numeric>

#include "netform/errors.hpp"

namespace netform {

namespace {

void validate_node_count(int n_nodes) {
  if (n_nodes < 2 || n_nodes > kMaxNodes) {
    throw InvalidArgument("node count " + std::to_string(n_nodes) + " outside [2, " +
                          std::to_string(kMaxNodes) + "]");
  }
}

std::uint64_t dyad_mask(int n_nodes) {
  const int m = dyad_count(n_nodes);
  return m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
}

}  // namespace

void validate_dyad(Dyad d, int n_nodes) {
  if (d.i == d.j || d.i < 0 || d.j < 0 || d.i >= n_nodes || d.j >= n_nodes) {
    throw InvalidArgument("invalid dyad (" + std::to_string(d.i) + "," + std::to_string(d.j) +
                          ") for " + std::to_string(n_nodes) + " nodes");
  }
}

std::vector<Dyad> all_dyads(int n_nodes) {
  std::vector<Dyad> out;
  out.reserve(dyad_count(n_nodes));
  for (int k = 0; k < dyad_count(n_nodes); ++k) out.push_back(dyad_at(k, n_nodes));
  return out;
}

Network::Network(int n_nodes) : Network(n_nodes, 0) {}

Network::Network(int n_nodes, std::uint64_t bits) : n_nodes_(n_nodes), bits_(bits) {
  validate_node_count(n_nodes);
  if ((bits & ~dyad_mask(n_nodes)) != 0) {
    throw InvalidArgument("bitset has bits beyond the dyad range");
  }
}

bool Network::has(Dyad d) const {
  validate_dyad(d, n_nodes_);
  return has_index(dyad_index(d, n_nodes_));
}

int Network::size() const { return std::popcount(bits_); }

Network Network::switched(Dyad d) const {
  validate_dyad(d, n_nodes_);
  return switched_index(dyad_index(d, n_nodes_));
}

std::vector<Dyad> Network::links() const {
  std::vector<Dyad> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(dyad_at(std::countr_zero(b), n_nodes_));
  }
  return out;
}

std::uint64_t Network::out_bits(int i) const {
  const int width = n_nodes_ - 1;
  return (bits_ >> (i * width)) & ((std::uint64_t{1} << width) - 1);
}

Network switch_link(const Network& g, Dyad d) { return g.switched(d); }

Network out_subgraph(const Network& g, int i) {
  if (i < 0 || i >= g.n_nodes()) throw InvalidArgument("node index out of range");
  return Network(g.n_nodes(), g.out_bits(i) << (i * (g.n_nodes() - 1)));
}

std::string to_hex(const Network& g) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), g.bits(), 16);
  (void)ec;
  return "g:" + std::string(buf, end);
}

Network network_from_hex(std::string_view text, int n_nodes) {
  if (text.substr(0, 2) != "g:") throw InvalidArgument("network encoding must start with 'g:'");
  text.remove_prefix(2);
  std::uint64_t bits = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), bits, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument("malformed network encoding");
  }
  return Network(n_nodes, bits);
}

StateIndex state_count(int n_nodes, int cap_log2) {
  validate_node_count(n_nodes);
  const int bits = dyad_count(n_nodes);
  if (bits > cap_log2 || bits > 62) {
    throw StateSpaceOverflow("2^" + std::to_string(bits) + " networks on " +
                             std::to_string(n_nodes) + " nodes exceed the cap 2^" +
                             std::to_string(cap_log2));
  }
  return StateIndex{1} << bits;
}

NetworkRange enumerate_networks(int n_nodes, int cap_log2) {
  return NetworkRange(n_nodes, state_count(n_nodes, cap_log2));
}

TypeProfile TypeProfile::from_assignment(std::vector<int> assignment, int n_types) {
  if (n_types < 1) throw InvalidArgument("type count must be positive");
  if (assignment.empty()) throw InvalidArgument("empty type assignment");
  for (int t : assignment) {
    if (t < 0 || t >= n_types) throw InvalidArgument("type label outside [0, C)");
  }
  TypeProfile tp;
  tp.n_types_ = n_types;
  tp.assignment_ = std::move(assignment);
  return tp;
}

TypeProfile TypeProfile::from_group_sizes(const std::vector<int>& sizes) {
  std::vector<int> assignment;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    if (sizes[r] < 0) throw InvalidArgument("negative group size");
    assignment.insert(assignment.end(), sizes[r], static_cast<int>(r));
  }
  return from_assignment(std::move(assignment), static_cast<int>(sizes.size()));
}

TypeProfile TypeProfile::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("type weights must be strictly positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("type weights must sum to 1");
  TypeProfile tp;
  tp.n_types_ = static_cast<int>(weights.size());
  tp.weights_ = std::move(weights);
  return tp;
}

std::vector<int> TypeProfile::group_sizes() const {
  if (!finite()) throw InvalidArgument("group sizes need a finite-N profile");
  std::vector<int> sizes(n_types_, 0);
  for (int t : assignment_) ++sizes[t];
  return sizes;
}

std::vector<double> TypeProfile::weights() const {
  if (!finite()) return weights_;
  std::vector<double> w(n_types_, 0.0);
  for (int t : assignment_) w[t] += 1.0;
  for (double& x : w) x /= static_cast<double>(assignment_.size());
  return w;
}

std::vector<int> typed_outdegrees(const Network& g, int i, const TypeProfile& tp) {
  if (!tp.finite()) throw InvalidArgument("typed out-degrees need a finite-N profile");
  if (tp.n_nodes() != g.n_nodes()) throw InvalidArgument("profile/network size mismatch");
  if (i < 0 || i >= g.n_nodes()) throw InvalidArgument("node index out of range");
  std::vector<int> counts(tp.n_types(), 0);
  for (int j = 0; j < g.n_nodes(); ++j) {
    if (j != i && g.has_index(dyad_index({i, j}, g.n_nodes()))) ++counts[tp.type_of(j)];
  }
  return counts;
}

}  // namespace netform
