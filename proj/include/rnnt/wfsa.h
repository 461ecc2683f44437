// include/rnnt/wfsa.h
//
// Minimal weighted finite-state acceptor. Arcs carry an optional time index
// and unit index next to the label; these are what later binds a lattice arc
// to an entry of the score tensor.
//
// The engine has no epsilon handling. Structural probability-one arcs use
// negative sentinel labels that compose like ordinary symbols, so every
// operand that must let such an arc through carries the same sentinel.

#ifndef RNNT_WFSA_H_
#define RNNT_WFSA_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rnnt {

inline constexpr int32_t kEpsilon = -1;
inline constexpr int32_t kWildStart = -2;
inline constexpr int32_t kWildEnd = -3;
inline constexpr int32_t kFrameSkip = -4;

inline constexpr int32_t kNoIndex = -1;

inline bool IsSentinel(int32_t label) {
  return label <= kWildStart && label >= kFrameSkip;
}

struct Arc {
  int32_t src = 0;
  int32_t dst = 0;
  int32_t label = 0;
  int32_t time_idx = kNoIndex;
  int32_t unit_idx = kNoIndex;
  double weight = 0.0;

  friend bool operator==(const Arc &, const Arc &) = default;
};

// State 0 is the start state. An acceptor with zero states is the canonical
// empty acceptor.
class Wfsa {
 public:
  Wfsa() = default;
  explicit Wfsa(int32_t num_states) : num_states_(num_states),
                                      is_final_(num_states, 0) {}

  // Bulk construction; validates every arc in one pass.
  static Wfsa FromArcs(int32_t num_states, std::vector<Arc> arcs,
                       std::span<const int32_t> finals);

  int32_t AddState();
  // Appends an arc; invalidates arc sorting.
  void AddArc(const Arc &arc);
  void SetFinal(int32_t state, bool final = true);

  int32_t NumStates() const { return num_states_; }
  int32_t NumArcs() const { return static_cast<int32_t>(arcs_.size()); }
  bool Empty() const { return num_states_ == 0; }
  static constexpr int32_t Start() { return 0; }

  const std::vector<Arc> &Arcs() const { return arcs_; }
  const Arc &GetArc(int32_t i) const { return arcs_[i]; }
  bool IsFinal(int32_t state) const { return is_final_[state] != 0; }
  std::vector<int32_t> Finals() const;

  // True when arcs are ordered by (src, label); then OutArcs() is valid.
  bool IsArcSorted() const { return sorted_; }
  // Arcs leaving `state`; requires IsArcSorted().
  std::span<const Arc> OutArcs(int32_t state) const;

  // Replaces the arc weights, in arc order.
  void SetWeights(std::span<const double> weights);

  friend bool operator==(const Wfsa &a, const Wfsa &b) {
    return a.num_states_ == b.num_states_ && a.arcs_ == b.arcs_ &&
           a.is_final_ == b.is_final_;
  }

 private:
  friend Wfsa ArcSort(Wfsa g);

  int32_t num_states_ = 0;
  std::vector<Arc> arcs_;
  std::vector<uint8_t> is_final_;
  bool sorted_ = false;
  std::vector<int32_t> state_begin_;  // size num_states_ + 1 when sorted_
};

// Stable sort of arcs by (src, label).
Wfsa ArcSort(Wfsa g);

// Product construction over equal labels. Both inputs must be arc-sorted and
// free of epsilon labels. States of the result are the reachable pairs,
// numbered by discovery from (start, start). Each result arc takes its time
// and unit index from whichever operand defines it; both defining the same
// field is a ComposeError. The result is arc-sorted.
Wfsa Compose(const Wfsa &left, const Wfsa &right);

// Keeps the states lying on some start-to-final path, preserving their
// relative order. Returns the canonical empty acceptor when there is none.
Wfsa Connect(const Wfsa &g);

// Order in which every arc goes forward. Ties are broken by smallest state
// id, so the result is deterministic. Throws CycleError.
std::vector<int32_t> TopSort(const Wfsa &g);

// Renumbers states so that order[i] becomes state i. order[0] must be the
// start state.
Wfsa Renumber(const Wfsa &g, std::span<const int32_t> order);

using BigInt = boost::multiprecision::cpp_int;

// Number of distinct start-to-final arc sequences. Throws CycleError.
BigInt CountPaths(const Wfsa &g);

// Display name for a label: sentinels get fixed names; other labels use
// `names` when it covers them, else the number.
std::string LabelName(int32_t label, const std::vector<std::string> &names);

// Graphviz rendering. Arc captions are "label:time:unit/weight" with "-" for
// absent indices; final states are double circles and wild-card arcs are
// bold.
std::string ToDot(const Wfsa &g, const std::vector<std::string> &names = {},
                  const std::string &title = "wfsa");

// One arc per line, "src dst label time unit weight" ("-" for an absent
// index), followed by a "final" line listing the final states. Weights
// round-trip exactly.
std::string ToText(const Wfsa &g);
Wfsa FromText(const std::string &text);

}  // namespace rnnt

#endif  // RNNT_WFSA_H_
