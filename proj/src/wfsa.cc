// src/wfsa.cc

#include "rnnt/wfsa.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "rnnt/errors.h"

namespace rnnt {

Wfsa Wfsa::FromArcs(int32_t num_states, std::vector<Arc> arcs,
                    std::span<const int32_t> finals) {
  Wfsa g(num_states);
  for (const Arc &a : arcs) {
    if (a.src < 0 || a.src >= num_states || a.dst < 0 || a.dst >= num_states) {
      throw ShapeError("arc " + std::to_string(a.src) + "->" +
                       std::to_string(a.dst) + " references a missing state");
    }
    if (IsSentinel(a.label) && a.weight != 0.0) {
      throw ShapeError("sentinel arcs must have weight 0");
    }
  }
  g.arcs_ = std::move(arcs);
  for (int32_t s : finals) g.SetFinal(s);
  return g;
}

int32_t Wfsa::AddState() {
  is_final_.push_back(0);
  if (sorted_) state_begin_.push_back(state_begin_.back());
  return num_states_++;
}

void Wfsa::AddArc(const Arc &arc) {
  if (arc.src < 0 || arc.src >= num_states_ || arc.dst < 0 ||
      arc.dst >= num_states_) {
    throw ShapeError("arc " + std::to_string(arc.src) + "->" +
                     std::to_string(arc.dst) + " references a missing state");
  }
  if (IsSentinel(arc.label) && arc.weight != 0.0) {
    throw ShapeError("sentinel arcs must have weight 0");
  }
  arcs_.push_back(arc);
  sorted_ = false;
  state_begin_.clear();
}

void Wfsa::SetFinal(int32_t state, bool final) {
  if (state < 0 || state >= num_states_) {
    throw ShapeError("final state " + std::to_string(state) + " out of range");
  }
  is_final_[state] = final ? 1 : 0;
}

std::vector<int32_t> Wfsa::Finals() const {
  std::vector<int32_t> out;
  for (int32_t s = 0; s < num_states_; ++s) {
    if (is_final_[s]) out.push_back(s);
  }
  return out;
}

std::span<const Arc> Wfsa::OutArcs(int32_t state) const {
  if (!sorted_) throw ComposeError("OutArcs() requires an arc-sorted acceptor");
  return std::span<const Arc>(arcs_).subspan(
      state_begin_[state], state_begin_[state + 1] - state_begin_[state]);
}

void Wfsa::SetWeights(std::span<const double> weights) {
  if (weights.size() != arcs_.size()) {
    throw ShapeError("weight count does not match arc count");
  }
  for (size_t i = 0; i < arcs_.size(); ++i) arcs_[i].weight = weights[i];
}

Wfsa ArcSort(Wfsa g) {
  std::stable_sort(g.arcs_.begin(), g.arcs_.end(),
                   [](const Arc &a, const Arc &b) {
                     return a.src != b.src ? a.src < b.src : a.label < b.label;
                   });
  g.state_begin_.assign(g.num_states_ + 1, 0);
  for (const Arc &a : g.arcs_) ++g.state_begin_[a.src + 1];
  for (int32_t s = 0; s < g.num_states_; ++s) {
    g.state_begin_[s + 1] += g.state_begin_[s];
  }
  g.sorted_ = true;
  return g;
}

namespace {

int32_t MergeIndex(int32_t a, int32_t b, const char *field) {
  if (a != kNoIndex && b != kNoIndex) {
    throw ComposeError(std::string("both operands define the ") + field +
                       " index of a matched arc pair");
  }
  return a != kNoIndex ? a : b;
}

void CheckNoEpsilon(const Wfsa &g) {
  for (const Arc &a : g.Arcs()) {
    if (a.label == kEpsilon) {
      throw ComposeError("epsilon label in composition operand");
    }
  }
}

}  // namespace

Wfsa Compose(const Wfsa &left, const Wfsa &right) {
  if (!left.IsArcSorted() || !right.IsArcSorted()) {
    throw ComposeError("composition operands must be arc-sorted");
  }
  CheckNoEpsilon(left);
  CheckNoEpsilon(right);
  if (left.Empty() || right.Empty()) return Wfsa();

  const int64_t right_states = right.NumStates();
  std::unordered_map<int64_t, int32_t> pair_to_state;
  std::vector<std::pair<int32_t, int32_t>> pairs;
  Wfsa out;
  auto state_of = [&](int32_t a, int32_t b) {
    int64_t key = int64_t{a} * right_states + b;
    auto [it, inserted] = pair_to_state.try_emplace(key, out.NumStates());
    if (inserted) {
      out.AddState();
      pairs.emplace_back(a, b);
      if (left.IsFinal(a) && right.IsFinal(b)) out.SetFinal(it->second);
    }
    return it->second;
  };
  state_of(left.Start(), right.Start());

  auto by_label = [](const Arc &arc, int32_t label) { return arc.label < label; };
  for (size_t next = 0; next < pairs.size(); ++next) {
    const auto [a, b] = pairs[next];
    const int32_t src = static_cast<int32_t>(next);
    std::span<const Arc> la = left.OutArcs(a), rb = right.OutArcs(b);
    // Walk the shorter arc list and binary-search the other.
    const bool left_short = la.size() <= rb.size();
    std::span<const Arc> outer = left_short ? la : rb;
    std::span<const Arc> inner = left_short ? rb : la;
    size_t i = 0;
    while (i < outer.size()) {
      const int32_t label = outer[i].label;
      size_t i_end = i;
      while (i_end < outer.size() && outer[i_end].label == label) ++i_end;
      auto lo = std::lower_bound(inner.begin(), inner.end(), label, by_label);
      auto hi = lo;
      while (hi != inner.end() && hi->label == label) ++hi;
      if (lo != hi) {
        // Emit pairs in (left arc, right arc) order regardless of which side
        // was walked.
        std::span<const Arc> lrange = left_short ? outer.subspan(i, i_end - i)
                                                 : std::span<const Arc>(lo, hi);
        std::span<const Arc> rrange = left_short ? std::span<const Arc>(lo, hi)
                                                 : outer.subspan(i, i_end - i);
        for (const Arc &x : lrange) {
          for (const Arc &y : rrange) {
            Arc arc;
            arc.src = src;
            arc.label = label;
            arc.time_idx = MergeIndex(x.time_idx, y.time_idx, "time");
            arc.unit_idx = MergeIndex(x.unit_idx, y.unit_idx, "unit");
            arc.weight = x.weight + y.weight;
            arc.dst = state_of(x.dst, y.dst);
            out.AddArc(arc);
          }
        }
      }
      i = i_end;
    }
  }
  // Arcs were emitted grouped by src and by ascending label.
  return ArcSort(std::move(out));
}

Wfsa Connect(const Wfsa &g) {
  const int32_t n = g.NumStates();
  if (n == 0) return Wfsa();
  std::vector<std::vector<int32_t>> succ(n), pred(n);
  for (const Arc &a : g.Arcs()) {
    succ[a.src].push_back(a.dst);
    pred[a.dst].push_back(a.src);
  }
  auto flood = [n](std::vector<int32_t> seeds,
                   const std::vector<std::vector<int32_t>> &adj) {
    std::vector<uint8_t> seen(n, 0);
    for (int32_t s : seeds) seen[s] = 1;
    while (!seeds.empty()) {
      int32_t s = seeds.back();
      seeds.pop_back();
      for (int32_t d : adj[s]) {
        if (!seen[d]) {
          seen[d] = 1;
          seeds.push_back(d);
        }
      }
    }
    return seen;
  };
  std::vector<uint8_t> accessible = flood({g.Start()}, succ);
  std::vector<uint8_t> coaccessible = flood(g.Finals(), pred);
  if (!accessible[g.Start()] || !coaccessible[g.Start()]) return Wfsa();

  std::vector<int32_t> new_id(n, -1);
  int32_t kept = 0;
  for (int32_t s = 0; s < n; ++s) {
    if (accessible[s] && coaccessible[s]) new_id[s] = kept++;
  }
  Wfsa out(kept);
  for (int32_t s = 0; s < n; ++s) {
    if (new_id[s] >= 0 && g.IsFinal(s)) out.SetFinal(new_id[s]);
  }
  for (Arc a : g.Arcs()) {
    if (new_id[a.src] < 0 || new_id[a.dst] < 0) continue;
    a.src = new_id[a.src];
    a.dst = new_id[a.dst];
    out.AddArc(a);
  }
  return g.IsArcSorted() ? ArcSort(std::move(out)) : out;
}

std::vector<int32_t> TopSort(const Wfsa &g) {
  const int32_t n = g.NumStates();
  std::vector<int32_t> in_degree(n, 0);
  std::vector<std::vector<int32_t>> succ(n);
  for (const Arc &a : g.Arcs()) {
    ++in_degree[a.dst];
    succ[a.src].push_back(a.dst);
  }
  std::priority_queue<int32_t, std::vector<int32_t>, std::greater<>> ready;
  for (int32_t s = 0; s < n; ++s) {
    if (in_degree[s] == 0) ready.push(s);
  }
  std::vector<int32_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    int32_t s = ready.top();
    ready.pop();
    order.push_back(s);
    for (int32_t d : succ[s]) {
      if (--in_degree[d] == 0) ready.push(d);
    }
  }
  if (static_cast<int32_t>(order.size()) != n) {
    throw CycleError("cyclic graph: no topological order exists");
  }
  return order;
}

Wfsa Renumber(const Wfsa &g, std::span<const int32_t> order) {
  const int32_t n = g.NumStates();
  if (static_cast<int32_t>(order.size()) != n) {
    throw ShapeError("renumbering must list every state once");
  }
  if (n == 0) return Wfsa();
  if (order[0] != g.Start()) {
    throw ShapeError("renumbering must keep the start state first");
  }
  std::vector<int32_t> new_id(n, -1);
  for (int32_t i = 0; i < n; ++i) {
    if (order[i] < 0 || order[i] >= n || new_id[order[i]] != -1) {
      throw ShapeError("renumbering is not a permutation");
    }
    new_id[order[i]] = i;
  }
  Wfsa out(n);
  for (int32_t s = 0; s < n; ++s) {
    if (g.IsFinal(s)) out.SetFinal(new_id[s]);
  }
  for (Arc a : g.Arcs()) {
    a.src = new_id[a.src];
    a.dst = new_id[a.dst];
    out.AddArc(a);
  }
  return out;
}

BigInt CountPaths(const Wfsa &g) {
  if (g.Empty()) return 0;
  std::vector<int32_t> order = TopSort(g);
  std::vector<std::vector<int32_t>> out_arcs(g.NumStates());
  for (int32_t i = 0; i < g.NumArcs(); ++i) {
    out_arcs[g.GetArc(i).src].push_back(i);
  }
  std::vector<BigInt> paths(g.NumStates());
  paths[g.Start()] = 1;
  BigInt total = 0;
  for (int32_t s : order) {
    if (paths[s] == 0) continue;
    if (g.IsFinal(s)) total += paths[s];
    for (int32_t i : out_arcs[s]) paths[g.GetArc(i).dst] += paths[s];
  }
  return total;
}

std::string LabelName(int32_t label, const std::vector<std::string> &names) {
  switch (label) {
    case kEpsilon: return "<eps>";
    case kWildStart: return "<w-start>";
    case kWildEnd: return "<w-end>";
    case kFrameSkip: return "<skip>";
    default: break;
  }
  if (label >= 0 && label < static_cast<int32_t>(names.size())) {
    return names[label];
  }
  return std::to_string(label);
}

namespace {

std::string IndexText(int32_t idx) {
  return idx == kNoIndex ? "-" : std::to_string(idx);
}

std::string DotEscape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string FormatWeight(double w, const char *fmt) {
  if (std::isinf(w)) return w < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, w);
  return buf;
}

}  // namespace

std::string ToDot(const Wfsa &g, const std::vector<std::string> &names,
                  const std::string &title) {
  std::ostringstream os;
  os << "digraph \"" << DotEscape(title) << "\" {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=circle];\n";
  for (int32_t s = 0; s < g.NumStates(); ++s) {
    os << "  " << s;
    if (g.IsFinal(s)) os << " [shape=doublecircle]";
    os << ";\n";
  }
  for (const Arc &a : g.Arcs()) {
    os << "  " << a.src << " -> " << a.dst << " [label=\""
       << DotEscape(LabelName(a.label, names)) << ':' << IndexText(a.time_idx)
       << ':' << IndexText(a.unit_idx) << '/' << FormatWeight(a.weight, "%.4g")
       << '"';
    if (a.label == kWildStart || a.label == kWildEnd) {
      os << ", style=bold";
    } else if (a.label == kFrameSkip) {
      os << ", style=dashed";
    }
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

std::string ToText(const Wfsa &g) {
  std::ostringstream os;
  for (const Arc &a : g.Arcs()) {
    os << a.src << ' ' << a.dst << ' ' << a.label << ' '
       << IndexText(a.time_idx) << ' ' << IndexText(a.unit_idx) << ' '
       << FormatWeight(a.weight, "%.17g") << '\n';
  }
  os << "final";
  for (int32_t s : g.Finals()) os << ' ' << s;
  os << '\n';
  return os.str();
}

Wfsa FromText(const std::string &text) {
  auto fail = [](const std::string &line) {
    throw FormatError(FormatErrorKind::kMalformed,
                      "bad acceptor text line: '" + line + "'");
  };
  auto parse_index = [&](const std::string &tok, const std::string &line) {
    if (tok == "-") return kNoIndex;
    try {
      return static_cast<int32_t>(std::stoi(tok));
    } catch (const std::exception &) {
      fail(line);
    }
    return kNoIndex;
  };
  std::vector<Arc> arcs;
  std::vector<int32_t> finals;
  int32_t max_state = -1;
  bool saw_final = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (saw_final) fail(line);
    if (tok[0] == "final") {
      saw_final = true;
      for (size_t i = 1; i < tok.size(); ++i) {
        finals.push_back(parse_index(tok[i], line));
        if (finals.back() < 0) fail(line);
        max_state = std::max(max_state, finals.back());
      }
      continue;
    }
    if (tok.size() != 6) fail(line);
    Arc a;
    a.src = parse_index(tok[0], line);
    a.dst = parse_index(tok[1], line);
    a.label = parse_index(tok[2], line);
    a.time_idx = parse_index(tok[3], line);
    a.unit_idx = parse_index(tok[4], line);
    if (a.src < 0 || a.dst < 0) fail(line);
    if (tok[5] == "-inf") {
      a.weight = -std::numeric_limits<double>::infinity();
    } else {
      try {
        a.weight = std::stod(tok[5]);
      } catch (const std::exception &) {
        fail(line);
      }
    }
    max_state = std::max({max_state, a.src, a.dst});
    arcs.push_back(a);
  }
  if (!saw_final) fail("<missing final line>");
  Wfsa g(max_state + 1);
  for (const Arc &a : arcs) g.AddArc(a);
  for (int32_t s : finals) g.SetFinal(s);
  return g;
}

}  // namespace rnnt
