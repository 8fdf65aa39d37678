#include "linf/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "linf/cd_solver.hpp"
#include "linf/errors.hpp"

namespace linf {

// ---------------------------------------------------------------- tree approximator

template <class F>
void TreeApproximator::walk(int e, F&& visit) const {
  int a = net_->edges[e].tail, b = net_->edges[e].head;
  // Column of B for e is +1 at the head and -1 at the tail.
  while (a != b) {
    if (depth_[a] >= depth_[b]) {
      visit(row_[a], -1.0);
      a = parent_[a];
    } else {
      visit(row_[b], 1.0);
      b = parent_[b];
    }
  }
}

TreeApproximator::TreeApproximator(const FlowNetwork& net, QualityPolicy policy) : net_(&net) {
  const int n = net.n, m = net.m();
  if (n <= 0) throw std::invalid_argument("tree approximator: empty graph");
  for (const Edge& e : net.edges) {
    if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n)
      throw std::invalid_argument("tree approximator: edge endpoint out of range");
    if (!(e.capacity > 0.0)) throw std::invalid_argument("tree approximator: capacities must be positive");
  }

  // Prim from several roots; a heap keyed by (capacity desc, discovery order) keeps the tree a
  // maximum-capacity spanning tree while breaking ties breadth-first. Keep the root whose tree
  // certifies the smallest quality.
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < m; ++e) {
    if (net.edges[e].tail == net.edges[e].head) continue;
    adj[net.edges[e].tail].push_back({net.edges[e].head, e});
    adj[net.edges[e].head].push_back({net.edges[e].tail, e});
  }
  std::vector<int> roots;
  const int tries = std::min(n, 16);
  for (int k = 0; k < tries; ++k) roots.push_back(static_cast<int>(static_cast<long long>(k) * n / tries));
  int best_root = roots[0];
  double best = 0.0;
  for (int root : roots) {
    build_from(net, adj, root);
    if (root == roots[0] || certified_ < best) {
      best = certified_;
      best_root = root;
    }
  }
  if (best_root != roots.back()) build_from(net, adj, best_root);
  alpha_ = policy == QualityPolicy::certified ? certified_ : std::max(1.0, static_cast<double>(m));
}

void TreeApproximator::build_from(const FlowNetwork& net, const std::vector<std::vector<std::pair<int, int>>>& adj,
                                  int root) {
  const int n = net.n, m = net.m();
  parent_.assign(n, -1);
  parent_edge_.assign(n, -1);
  depth_.assign(n, 0);
  row_.assign(n, -1);
  order_.clear();
  tree_edge_.clear();
  row_vertex_.clear();
  std::vector<char> seen(n, 0);
  using Key = std::tuple<double, long, int, int, int>;  // -capacity, stamp, vertex, from, edge
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  long stamp = 0;
  heap.push({0.0, stamp++, root, -1, -1});
  while (!heap.empty()) {
    auto [neg, st, v, from, e] = heap.top();
    heap.pop();
    if (seen[v]) continue;
    seen[v] = 1;
    order_.push_back(v);
    if (from >= 0) {
      parent_[v] = from;
      parent_edge_[v] = e;
      depth_[v] = depth_[from] + 1;
      row_[v] = static_cast<int>(tree_edge_.size());
      tree_edge_.push_back(e);
      row_vertex_.push_back(v);
    }
    for (auto [w, id] : adj[v])
      if (!seen[w]) heap.push({-net.edges[id].capacity, stamp++, w, v, id});
  }
  if (static_cast<int>(order_.size()) != n) throw std::invalid_argument("tree approximator: graph is disconnected");
  // Children must follow parents in order_; Prim's pop order guarantees it.
  cut_cap_.assign(tree_edge_.size(), 0.0);
  for (int e = 0; e < m; ++e) {
    const double u = net.edges[e].capacity;
    walk(e, [&](int row, double) { cut_cap_[row] += u; });
  }
  certified_ = 1.0;
  for (std::size_t r = 0; r < tree_edge_.size(); ++r)
    certified_ = std::max(certified_, cut_cap_[r] / net.edges[tree_edge_[r]].capacity);
}

std::vector<double> TreeApproximator::subtree_sums(const std::vector<double>& d) const {
  if (static_cast<int>(d.size()) != net_->n) throw std::invalid_argument("demand length mismatch");
  std::vector<double> s = d;
  for (std::size_t k = order_.size(); k-- > 1;) s[parent_[order_[k]]] += s[order_[k]];
  return s;
}

std::vector<double> TreeApproximator::apply(const std::vector<double>& d) const {
  const std::vector<double> s = subtree_sums(d);
  std::vector<double> out(tree_edge_.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = s[row_vertex_[r]] / cut_cap_[r];
  return out;
}

SparseMatrix TreeApproximator::regression_matrix() const {
  std::vector<Triplet> trip;
  for (int e = 0; e < net_->m(); ++e) {
    const double u = net_->edges[e].capacity;
    walk(e, [&](int row, double sign) { trip.push_back({row, e, 2.0 * alpha_ * sign * u / cut_cap_[row]}); });
  }
  return build_from_triplets(std::move(trip), rows(), net_->m());
}

std::vector<double> TreeApproximator::route_exact(const std::vector<double>& d) const {
  const std::vector<double> s = subtree_sums(d);
  double scale = 1.0;
  for (double v : d) scale += std::abs(v);
  if (std::abs(s[order_[0]]) > 1e-9 * scale) throw Infeasible("demands do not sum to zero");
  std::vector<double> f(net_->m(), 0.0);
  for (std::size_t k = 1; k < order_.size(); ++k) {
    const int v = order_[k], e = parent_edge_[v];
    // Subtree of v needs net inflow s[v] through its parent edge.
    f[e] = net_->edges[e].head == v ? s[v] : -s[v];
  }
  return f;
}

// ---------------------------------------------------------------- almost route

RouteSolver parse_route_solver(const std::string& name) {
  if (name == "cd-l2") return RouteSolver::cd_l2;
  if (name == "cd-diag") return RouteSolver::cd_diagonal;
  if (name == "mirror-prox") return RouteSolver::mirror_prox;
  throw std::invalid_argument("unknown routing solver '" + name + "'");
}

std::string route_solver_name(RouteSolver s) {
  switch (s) {
    case RouteSolver::cd_l2: return "cd-l2";
    case RouteSolver::cd_diagonal: return "cd-diag";
    case RouteSolver::mirror_prox: return "mirror-prox";
  }
  return "?";
}

namespace {

double total_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

void check_sum_zero(const std::vector<double>& d) {
  double s = 0.0;
  for (double v : d) s += v;
  if (std::abs(s) > 1e-9 * (1.0 + total_abs(d))) throw Infeasible("demands do not sum to zero");
}

struct Probe {
  bool routable = false;
  std::vector<double> x;  // congestion units
  long inner = 0;
};

AlmostRouteResult route_with(const FlowNetwork& net, const std::vector<double>& d, const CongestionApproximator& approx,
                             const SparseMatrix& a, double eps, Rng& rng, const RouteOptions& opt) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("almost_route: eps must lie in (0, 1)");
  check_sum_zero(d);
  const int m = net.m();
  const double alpha = approx.quality();
  const std::vector<double> rd = approx.apply(d);
  const double lo = norm_inf(rd);
  AlmostRouteResult res;
  res.flow.assign(m, 0.0);
  if (lo == 0.0) return res;

  std::vector<double> b(rd.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 2.0 * alpha * rd[i];
  const double top = alpha * lo * (1.0 - 1e-12);

  auto probe = [&](double r) {
    Probe p;
    ++res.solves;
    if (r >= top) {
      // The tree routing has congestion at most alpha |Rd|_inf, so it certifies r.
      std::vector<double> f = approx.route_exact(d);
      p.x.resize(m);
      for (int e = 0; e < m; ++e) p.x[e] = f[e] / net.edges[e].capacity;
      p.routable = true;
      return p;
    }
    RegressionInstance inst;
    inst.matrix = a;
    inst.rhs.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) inst.rhs[i] = b[i] / r;
    inst.radius = 1.0;
    inst.epsilon = eps / 4.0;
    inst.sparsity = opt.sparsity > 0.0 ? opt.sparsity : static_cast<double>(m);
    double value = 0.0;
    std::vector<double> xu;
    if (opt.solver == RouteSolver::mirror_prox) {
      MirrorProxOptions mo = opt.mirror;
      mo.tau = opt.tau;
      FlowRegressResult fr = solve_flow_regress(inst, rng, mo);
      value = fr.value;
      xu = std::move(fr.x);
      p.inner = fr.iterations;
    } else {
      BoxSolveOptions bo;
      bo.stop_below = eps / 2.0;
      // A positive dual bound proves r is too small; the margin absorbs roundoff in that bound.
      bo.stop_above = 1e-9 * (1.0 + norm_inf(inst.rhs));
      BoxSolveResult br =
          solve_box_linf(inst, opt.solver == RouteSolver::cd_l2 ? RegMode::l2 : RegMode::diagonal, rng, bo);
      value = br.value;
      xu = std::move(br.x);
      p.inner = br.inner_iters;
    }
    p.routable = value <= eps / 2.0;
    p.x.resize(m);
    for (int e = 0; e < m; ++e) p.x[e] = r * std::clamp(xu[e], -1.0, 1.0);
    return p;
  };

  double r = lo;
  Probe hit = probe(r);
  res.inner_iterations += hit.inner;
  while (!hit.routable) {
    r *= 2.0;
    hit = probe(r);
    res.inner_iterations += hit.inner;
  }
  double accepted = r;
  if (r > lo) {
    // Smallest routable point of the (1 + eps/4) grid strictly inside (r/2, r).
    std::vector<double> grid;
    for (double g = 0.5 * r * (1.0 + eps / 4.0); g < r * (1.0 - 1e-12); g *= 1.0 + eps / 4.0) grid.push_back(g);
    int left = 0, right = static_cast<int>(grid.size());
    while (left < right) {
      const int mid = (left + right) / 2;
      Probe p = probe(grid[mid]);
      res.inner_iterations += p.inner;
      if (p.routable) {
        hit = std::move(p);
        accepted = grid[mid];
        right = mid;
      } else {
        left = mid + 1;
      }
    }
  }

  res.radius = accepted;
  for (int e = 0; e < m; ++e) res.flow[e] = net.edges[e].capacity * hit.x[e];
  std::vector<double> left_over = d;
  const std::vector<double> bf = incidence_apply(net, res.flow);
  for (int v = 0; v < net.n; ++v) left_over[v] -= bf[v];
  res.composite = 2.0 * alpha * norm_inf(approx.apply(left_over)) + norm_inf(hit.x);
  return res;
}

}  // namespace

AlmostRouteResult almost_route(const FlowNetwork& net, const std::vector<double>& d, const CongestionApproximator& approx,
                               double eps, Rng& rng, const RouteOptions& opt) {
  return route_with(net, d, approx, approx.regression_matrix(), eps, rng, opt);
}

// ---------------------------------------------------------------- flow to regress

FlowToRegressResult flow_to_regress(const FlowNetwork& net, const std::vector<double>& d, double eps, Rng& rng,
                                    const RouteOptions& opt, QualityPolicy policy) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("flow_to_regress: eps must lie in (0, 1)");
  if (static_cast<int>(d.size()) != net.n) throw std::invalid_argument("flow_to_regress: demand length mismatch");
  check_sum_zero(d);
  const TreeApproximator tree(net, policy);
  const SparseMatrix a = tree.regression_matrix();
  FlowToRegressResult out;
  out.alpha = tree.quality();

  const int m = net.m();
  std::vector<double> f(m, 0.0), dk = d;
  const double start = norm_inf(tree.apply(d));
  const int rounds = static_cast<int>(std::ceil(std::log2(2.0 * std::max(1, m))));
  double first_radius = 0.0;
  for (int k = 0; k <= rounds; ++k) {
    const double before = norm_inf(tree.apply(dk));
    if (before <= 1e-13 * start) break;
    const double acc = k == 0 ? eps : 0.5;
    const AlmostRouteResult step = route_with(net, dk, tree, a, acc, rng, opt);
    out.inner_iterations += step.inner_iterations;
    for (int e = 0; e < m; ++e) f[e] += step.flow[e];
    // Recompute from the total so roundoff does not accumulate across rounds.
    const std::vector<double> bf = incidence_apply(net, f);
    for (int v = 0; v < net.n; ++v) dk[v] = d[v] - bf[v];
    const double after = norm_inf(tree.apply(dk));
    out.rounds.push_back({k, acc, before, after, step.radius, after <= acc * before + 1e-12 * start});
    if (k == 0) first_radius = step.radius;
    // Tree routing of what is left costs at most alpha |Rd|_inf; stop once that fits in the eps budget.
    if (opt.early_exit && out.alpha * after <= 0.25 * eps * first_radius) break;
  }
  const std::vector<double> rest = tree.route_exact(dk);
  for (int e = 0; e < m; ++e) f[e] += rest[e];
  out.solution = make_flow_solution(net, std::move(f), 0.0);
  return out;
}

// ---------------------------------------------------------------- approximate max flow

namespace {

// Edges inside the connected component of `root`, with vertex and edge maps.
struct Component {
  FlowNetwork net;
  std::vector<int> edge_of;  // sub edge -> original edge
  bool whole = true;
};

Component component_of(const FlowNetwork& net, int root) {
  std::vector<std::vector<int>> inc(net.n);
  for (int e = 0; e < net.m(); ++e) {
    inc[net.edges[e].tail].push_back(e);
    inc[net.edges[e].head].push_back(e);
  }
  std::vector<int> id(net.n, -1), queue{root};
  id[root] = 0;
  for (std::size_t k = 0; k < queue.size(); ++k) {
    for (int e : inc[queue[k]]) {
      const int w = net.edges[e].tail == queue[k] ? net.edges[e].head : net.edges[e].tail;
      if (id[w] < 0) {
        id[w] = static_cast<int>(queue.size());
        queue.push_back(w);
      }
    }
  }
  Component c;
  c.whole = static_cast<int>(queue.size()) == net.n;
  if (c.whole) {
    c.net = net;
    c.edge_of.resize(net.m());
    std::iota(c.edge_of.begin(), c.edge_of.end(), 0);
    return c;
  }
  c.net.n = static_cast<int>(queue.size());
  c.net.directed = net.directed;
  c.net.source = net.source >= 0 ? id[net.source] : -1;
  c.net.sink = net.sink >= 0 ? id[net.sink] : -1;
  for (int e = 0; e < net.m(); ++e) {
    if (id[net.edges[e].tail] < 0) continue;
    c.net.edges.push_back({id[net.edges[e].tail], id[net.edges[e].head], net.edges[e].capacity});
    c.edge_of.push_back(e);
  }
  return c;
}

}  // namespace

ApproxMaxflowResult approx_maxflow(const FlowNetwork& net, double eps, Rng& rng, const RouteOptions& opt) {
  if (net.source < 0 || net.sink < 0) throw std::invalid_argument("max flow needs a source and a sink");
  if (net.source == net.sink) throw std::invalid_argument("source and sink coincide");
  ApproxMaxflowResult out;
  const Component comp = component_of(net, net.source);
  if (comp.net.sink < 0) throw Infeasible("the sink is not connected to the source; a unit demand cannot be routed");
  FlowToRegressResult r = flow_to_regress(comp.net, comp.net.st_demand(1.0), eps, rng, opt);
  const double c = r.solution.max_congestion();
  if (!(c > 0.0)) throw SolverFault("unit demand routed with zero congestion");
  std::vector<double> f(net.m(), 0.0);
  for (std::size_t k = 0; k < comp.edge_of.size(); ++k) f[comp.edge_of[k]] = r.solution.flow[k] / c;
  out.solution = make_flow_solution(net, std::move(f), 1.0 / c);
  out.rounds = std::move(r.rounds);
  out.congestion_unit = c;
  return out;
}

// ---------------------------------------------------------------- rounding

namespace {

void require_unit(const FlowNetwork& net, const char* who) {
  for (const Edge& e : net.edges)
    if (e.capacity != 1.0) throw std::invalid_argument(std::string(who) + ": capacities must all be 1");
  if (net.source < 0 || net.sink < 0 || net.source == net.sink)
    throw std::invalid_argument(std::string(who) + ": needs distinct source and sink");
}

// Residual capacity of edge e in the direction tail->head (dir > 0) or head->tail.
double residual(const FlowNetwork& net, int e, double f, int dir) {
  const double u = net.edges[e].capacity;
  if (dir > 0) return u - f;
  return net.directed ? f : u + f;
}

// BFS over residual edges; returns (edge, dir) steps from s to t, empty if unreachable.
std::vector<std::pair<int, int>> residual_path(const FlowNetwork& net, const std::vector<double>& f,
                                               const std::vector<std::vector<int>>& inc, double tol) {
  std::vector<std::pair<int, int>> via(net.n, {-1, 0});
  std::vector<char> seen(net.n, 0);
  std::vector<int> queue{net.source};
  seen[net.source] = 1;
  for (std::size_t k = 0; k < queue.size() && !seen[net.sink]; ++k) {
    const int v = queue[k];
    for (int e : inc[v]) {
      const Edge& ed = net.edges[e];
      const int dir = ed.tail == v ? 1 : -1;
      const int w = dir > 0 ? ed.head : ed.tail;
      if (seen[w] || residual(net, e, f[e], dir) <= tol) continue;
      seen[w] = 1;
      via[w] = {e, dir};
      queue.push_back(w);
    }
  }
  std::vector<std::pair<int, int>> path;
  if (!seen[net.sink]) return path;
  for (int v = net.sink; v != net.source;) {
    path.push_back(via[v]);
    const Edge& ed = net.edges[via[v].first];
    v = via[v].second > 0 ? ed.tail : ed.head;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::vector<int>> incidence_lists(const FlowNetwork& net) {
  std::vector<std::vector<int>> inc(net.n);
  for (int e = 0; e < net.m(); ++e) {
    inc[net.edges[e].tail].push_back(e);
    if (net.edges[e].head != net.edges[e].tail) inc[net.edges[e].head].push_back(e);
  }
  return inc;
}

}  // namespace

IntegralFlowState round_to_integral(const FlowNetwork& net, const std::vector<double>& flow) {
  require_unit(net, "round_to_integral");
  const int m = net.m(), s = net.source, t = net.sink;
  if (static_cast<int>(flow.size()) != m) throw std::invalid_argument("round_to_integral: flow length mismatch");
  constexpr double kTol = 1e-6;

  // Edges 0..m-1 are the network; edge m is the virtual t -> s edge closing the circulation.
  std::vector<double> f(m + 1);
  std::vector<int> tail(m + 1), head(m + 1);
  for (int e = 0; e < m; ++e) {
    const double lo = net.directed ? 0.0 : -1.0;
    if (flow[e] < lo - kTol || flow[e] > 1.0 + kTol)
      throw std::invalid_argument("round_to_integral: capacity violated on edge " + std::to_string(e + 1));
    f[e] = net.edges[e].tail == net.edges[e].head ? 0.0 : std::clamp(flow[e], lo, 1.0);
    tail[e] = net.edges[e].tail;
    head[e] = net.edges[e].head;
  }
  const std::vector<double> inflow = incidence_apply(net, std::vector<double>(f.begin(), f.begin() + m));
  for (int v = 0; v < net.n; ++v)
    if (v != s && v != t && std::abs(inflow[v]) > kTol)
      throw std::invalid_argument("round_to_integral: conservation violated at vertex " + std::to_string(v + 1));
  const double value = inflow[t];
  if (std::abs(value + inflow[s]) > kTol) throw std::invalid_argument("round_to_integral: source and sink disagree");
  tail[m] = t;
  head[m] = s;
  f[m] = value;
  const double target = std::floor(value + 1e-9);

  std::vector<double> lo(m + 1), hi(m + 1);
  auto frac = [&](int e) { return std::abs(f[e] - std::round(f[e])) > 1e-9; };
  for (int e = 0; e <= m; ++e) {
    if (!frac(e)) f[e] = std::round(f[e]);
    lo[e] = std::floor(f[e]);
    hi[e] = std::ceil(f[e]);
  }

  std::vector<std::vector<int>> inc(net.n);
  std::vector<int> pos(net.n, -1);
  for (;;) {
    for (auto& l : inc) l.clear();
    int start = -1;
    for (int e = 0; e <= m; ++e) {
      if (!frac(e)) continue;
      inc[tail[e]].push_back(e);
      inc[head[e]].push_back(e);
      if (start < 0 || e == m) start = e;
    }
    if (start < 0) break;

    // Walk the fractional support until a vertex repeats.
    std::vector<int> path_v{tail[start]}, path_e;
    std::fill(pos.begin(), pos.end(), -1);
    pos[tail[start]] = 0;
    int v = tail[start], came = -1, first = start;
    std::vector<std::pair<int, int>> cycle;  // (edge, traversal dir)
    bool snapped = false;
    for (;;) {
      int next = first;
      if (next < 0) {
        for (int e : inc[v])
          if (e != came && frac(e)) {
            next = e;
            break;
          }
      }
      first = -1;
      if (next < 0) {
        // Only one fractional edge here: roundoff in the input; snap it.
        if (std::abs(f[came] - std::round(f[came])) > kTol)
          throw std::invalid_argument("round_to_integral: conservation violated at vertex " + std::to_string(v + 1));
        f[came] = std::round(f[came]);
        snapped = true;
        break;
      }
      const int w = tail[next] == v ? head[next] : tail[next];
      path_e.push_back(next);
      if (pos[w] >= 0) {
        for (std::size_t k = pos[w]; k < path_e.size(); ++k) {
          const int e = path_e[k], from = path_v[k];
          cycle.push_back({e, tail[e] == from ? 1 : -1});
        }
        break;
      }
      pos[w] = static_cast<int>(path_v.size());
      path_v.push_back(w);
      came = next;
      v = w;
    }
    if (snapped) continue;

    double up = 1e300, down = 1e300;
    int virtual_dir = 0;
    for (auto [e, dir] : cycle) {
      up = std::min(up, dir > 0 ? hi[e] - f[e] : f[e] - lo[e]);
      down = std::min(down, dir > 0 ? f[e] - lo[e] : hi[e] - f[e]);
      if (e == m) virtual_dir = dir;
    }
    // Lower the virtual edge when it is on the cycle, so the value ends at its floor.
    const int sign = virtual_dir > 0 ? -1 : 1;
    const double delta = sign > 0 ? up : down;
    for (auto [e, dir] : cycle) {
      f[e] += sign * dir * delta;
      if (std::abs(f[e] - lo[e]) <= 1e-12) f[e] = lo[e];
      if (std::abs(f[e] - hi[e]) <= 1e-12) f[e] = hi[e];
    }
  }

  IntegralFlowState st;
  st.flow.assign(f.begin(), f.begin() + m);
  st.value = f[m];
  if (st.value > target + 0.5) {
    // Ended at the ceiling: strip one unit path.
    const auto inc_net = incidence_lists(net);
    std::vector<std::pair<int, int>> via(net.n, {-1, 0});
    std::vector<char> seen(net.n, 0);
    std::vector<int> queue{s};
    seen[s] = 1;
    for (std::size_t k = 0; k < queue.size(); ++k) {
      const int x = queue[k];
      for (int e : inc_net[x]) {
        const int dir = net.edges[e].tail == x ? 1 : -1;
        const int w = dir > 0 ? net.edges[e].head : net.edges[e].tail;
        if (seen[w] || st.flow[e] * dir < 0.5) continue;
        seen[w] = 1;
        via[w] = {e, dir};
        queue.push_back(w);
      }
    }
    if (!seen[t]) throw SolverFault("round_to_integral: no flow path to strip");
    for (int x = t; x != s;) {
      auto [e, dir] = via[x];
      st.flow[e] -= dir;
      x = dir > 0 ? net.edges[e].tail : net.edges[e].head;
    }
    st.value -= 1.0;
  }
  return st;
}

IntegralFlowState augment_to_max(const FlowNetwork& net, IntegralFlowState state, int rounds) {
  if (net.source < 0 || net.sink < 0) throw std::invalid_argument("augment_to_max: needs a source and a sink");
  const auto inc = incidence_lists(net);
  state.maximal = false;
  for (int k = 0; rounds < 0 || k < rounds; ++k) {
    const auto path = residual_path(net, state.flow, inc, 1e-12);
    if (path.empty()) {
      state.maximal = true;
      return state;
    }
    double push = 1e300;
    for (auto [e, dir] : path) push = std::min(push, residual(net, e, state.flow[e], dir));
    for (auto [e, dir] : path) state.flow[e] += dir * push;
    state.value += push;
    ++state.augmentations;
  }
  state.maximal = residual_path(net, state.flow, inc, 1e-12).empty();
  return state;
}

// ---------------------------------------------------------------- directed reduction

DirectedReduction directed_reduce(const FlowNetwork& net) {
  if (!net.directed) throw std::invalid_argument("directed_reduce: network is undirected");
  require_unit(net, "directed_reduce");
  DirectedReduction red;
  red.arcs = net.m();
  FlowNetwork& g = red.undirected;
  g.n = net.n;
  g.directed = false;
  g.source = net.source;
  g.sink = net.sink;
  g.demand.assign(net.n, 0.0);
  for (const Edge& a : net.edges) {
    g.edges.push_back({net.source, a.head, 0.5});
    g.edges.push_back({a.head, a.tail, 0.5});
    g.edges.push_back({a.tail, net.sink, 0.5});
  }
  red.f_init.assign(g.edges.size(), 0.5);
  return red;
}

std::vector<double> DirectedReduction::recover(const std::vector<double>& f_final) const {
  const FlowNetwork& g = undirected;
  if (f_final.size() != f_init.size()) throw std::invalid_argument("recover: flow length mismatch");
  std::vector<double> diff(f_final.size());
  for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = f_final[e] - f_init[e];
  const auto inc = incidence_lists(g);
  std::vector<double> arcs(this->arcs, 0.0);
  constexpr double kTol = 1e-12;
  // Peel s-t paths off the positive part of the difference; the leftover cycles are dropped.
  // A simple s-t path never enters s or leaves t, so it only uses the reversed arc edges.
  for (;;) {
    std::vector<std::pair<int, int>> via(g.n, {-1, 0});
    std::vector<char> seen(g.n, 0);
    std::vector<int> queue{g.source};
    seen[g.source] = 1;
    for (std::size_t k = 0; k < queue.size() && !seen[g.sink]; ++k) {
      const int v = queue[k];
      for (int e : inc[v]) {
        const int dir = g.edges[e].tail == v ? 1 : -1;
        const int w = dir > 0 ? g.edges[e].head : g.edges[e].tail;
        if (seen[w] || dir * diff[e] <= kTol) continue;
        seen[w] = 1;
        via[w] = {e, dir};
        queue.push_back(w);
      }
    }
    if (!seen[g.sink]) break;
    double push = 1e300;
    for (int v = g.sink; v != g.source;) {
      auto [e, dir] = via[v];
      push = std::min(push, dir * diff[e]);
      v = dir > 0 ? g.edges[e].tail : g.edges[e].head;
    }
    for (int v = g.sink; v != g.source;) {
      auto [e, dir] = via[v];
      diff[e] -= dir * push;
      // Edge 3a+1 runs head -> tail of arc a; traversing it backwards moves flow along the arc.
      if (e % 3 == 1) arcs[e / 3] -= dir * push;
      v = dir > 0 ? g.edges[e].tail : g.edges[e].head;
    }
  }
  for (double& x : arcs) x = std::clamp(x, 0.0, 1.0);
  return arcs;
}

// ---------------------------------------------------------------- exact flows

double exact_flow_epsilon(int n, int m) {
  const double e = std::pow(std::max(1, n), 0.25) / std::pow(std::max(1, m), 0.75);
  return std::clamp(e, 0.02, 0.5);
}

ExactFlowResult exact_unit_maxflow(const FlowNetwork& net, FlowMode mode, Rng& rng, const RouteOptions& opt,
                                   double eps) {
  require_unit(net, "exact_unit_maxflow");
  if ((mode == FlowMode::directed) != net.directed)
    throw std::invalid_argument("exact_unit_maxflow: mode does not match the network");
  ExactFlowResult out;
  if (mode == FlowMode::undirected && component_of(net, net.source).net.sink < 0) {
    // Disconnected terminals: the zero flow is maximum.
    out.state.flow.assign(net.m(), 0.0);
    out.state.maximal = true;
    return out;
  }
  if (mode == FlowMode::undirected) {
    out.epsilon = eps > 0.0 ? eps : exact_flow_epsilon(net.n, net.m());
    ApproxMaxflowResult ap = approx_maxflow(net, out.epsilon, rng, opt);
    out.approx_value = ap.solution.value;
    out.rounds = std::move(ap.rounds);
    out.state = round_to_integral(net, ap.solution.flow);
  } else {
    const DirectedReduction red = directed_reduce(net);
    out.epsilon = eps > 0.0 ? eps : exact_flow_epsilon(red.undirected.n, red.undirected.m());
    ApproxMaxflowResult ap = approx_maxflow(red.undirected, out.epsilon, rng, opt);
    out.rounds = std::move(ap.rounds);
    const std::vector<double> arcs = red.recover(ap.solution.flow);
    out.approx_value = incidence_apply(net, arcs)[net.sink];
    out.state = round_to_integral(net, arcs);
  }
  out.rounded_value = static_cast<int>(std::lround(out.state.value));
  out.state = augment_to_max(net, std::move(out.state));
  if (mode == FlowMode::directed) {
    // f_max = f_init plus the arc flow lifted onto the reversed arc edges.
    for (double x : out.state.flow) out.init_distance_sq += x * x;
  }
  return out;
}

// ---------------------------------------------------------------- dinic

namespace {

struct Dinic {
  struct Arc {
    int to;
    double cap;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> out;
  std::vector<int> level, it;

  explicit Dinic(int n) : out(n), level(n), it(n) {}

  int add(int a, int b, double cap, double back) {
    arcs.push_back({b, cap});
    out[a].push_back(static_cast<int>(arcs.size()) - 1);
    arcs.push_back({a, back});
    out[b].push_back(static_cast<int>(arcs.size()) - 1);
    return static_cast<int>(arcs.size()) - 2;
  }

  bool bfs(int s, int t) {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a : out[v])
        if (arcs[a].cap > 1e-12 && level[arcs[a].to] < 0) {
          level[arcs[a].to] = level[v] + 1;
          q.push(arcs[a].to);
        }
    }
    return level[t] >= 0;
  }

  double dfs(int v, int t, double limit) {
    if (v == t) return limit;
    for (int& k = it[v]; k < static_cast<int>(out[v].size()); ++k) {
      const int a = out[v][k];
      const int w = arcs[a].to;
      if (arcs[a].cap <= 1e-12 || level[w] != level[v] + 1) continue;
      const double got = dfs(w, t, std::min(limit, arcs[a].cap));
      if (got > 0.0) {
        arcs[a].cap -= got;
        arcs[a ^ 1].cap += got;
        return got;
      }
    }
    return 0.0;
  }
};

}  // namespace

FlowSolution dinic(const FlowNetwork& net) {
  if (net.source < 0 || net.sink < 0 || net.source == net.sink)
    throw std::invalid_argument("dinic: needs distinct source and sink");
  Dinic g(net.n);
  std::vector<int> arc_of(net.m());
  for (int e = 0; e < net.m(); ++e) {
    const Edge& ed = net.edges[e];
    if (!(ed.capacity > 0.0)) throw std::invalid_argument("dinic: capacities must be positive");
    arc_of[e] = g.add(ed.tail, ed.head, ed.capacity, net.directed ? 0.0 : ed.capacity);
  }
  double value = 0.0;
  while (g.bfs(net.source, net.sink)) {
    std::fill(g.it.begin(), g.it.end(), 0);
    for (double got; (got = g.dfs(net.source, net.sink, 1e300)) > 0.0;) value += got;
  }
  std::vector<double> f(net.m());
  for (int e = 0; e < net.m(); ++e) {
    f[e] = net.edges[e].tail == net.edges[e].head ? 0.0 : net.edges[e].capacity - g.arcs[arc_of[e]].cap;
  }
  return make_flow_solution(net, std::move(f), value);
}

}  // namespace linf
