#include "linf/instance.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "linf/errors.hpp"

namespace linf {

std::vector<double> UnitBoxReduction::to_original(const std::vector<double>& unit_x) const {
  std::vector<double> x(unit_x.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = center[j] + radius * unit_x[j];
  return x;
}

std::vector<double> UnitBoxReduction::to_unit(const std::vector<double>& x) const {
  std::vector<double> u(x.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = (x[j] - center[j]) / radius;
  return u;
}

UnitBoxReduction reduce_to_unit_box(const RegressionInstance& inst, const std::vector<double>& center) {
  if (!(inst.radius > 0.0)) throw std::invalid_argument("reduce_to_unit_box: radius must be positive");
  if (static_cast<int>(center.size()) != inst.matrix.cols())
    throw std::invalid_argument("reduce_to_unit_box: center length mismatch");
  UnitBoxReduction red{inst, center, inst.radius};
  std::vector<double> ac = inst.matrix.multiply(center);
  for (std::size_t i = 0; i < ac.size(); ++i) red.unit.rhs[i] = (inst.rhs[i] - ac[i]) / inst.radius;
  red.unit.radius = 1.0;
  red.unit.epsilon = inst.epsilon / inst.radius;
  // ||x~||^2 = ||x - center||^2 / r^2
  if (inst.sparsity > 0.0) red.unit.sparsity = std::min<double>(inst.matrix.cols(), inst.sparsity / (inst.radius * inst.radius));
  if (inst.alpha_override) red.unit.alpha_override = *inst.alpha_override / inst.radius;
  return red;
}

void FlowNetwork::add_edge(int u, int v, double capacity) {
  if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
  if (!(capacity > 0.0)) throw std::invalid_argument("edge capacity must be positive");
  if (!directed && u > v) std::swap(u, v);
  edges.push_back({u, v, capacity});
}

bool FlowNetwork::connected() const {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int comps = n;
  for (const auto& e : edges) {
    int a = find(e.tail), b = find(e.head);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return comps == 1;
}

void FlowNetwork::validate() const {
  if (static_cast<int>(demand.size()) != n) throw std::invalid_argument("demand length mismatch");
  double sum = 0.0, scale = 0.0;
  for (double d : demand) {
    sum += d;
    scale += std::abs(d);
  }
  if (std::abs(sum) > 1e-9 * std::max(1.0, scale)) throw std::invalid_argument("demands do not sum to zero");
  if (!connected()) throw std::invalid_argument("graph is disconnected");
}

std::vector<double> FlowNetwork::st_demand(double value) const {
  if (source < 0 || sink < 0) throw std::invalid_argument("network has no source/sink");
  std::vector<double> d(n, 0.0);
  d[source] -= value;
  d[sink] += value;
  return d;
}

std::vector<double> incidence_apply(const FlowNetwork& net, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != net.m()) throw std::invalid_argument("incidence_apply: length mismatch");
  std::vector<double> out(net.n, 0.0);
  for (int e = 0; e < net.m(); ++e) {
    out[net.edges[e].tail] -= f[e];
    out[net.edges[e].head] += f[e];
  }
  return out;
}

std::vector<double> incidence_transpose_apply(const FlowNetwork& net, const std::vector<double>& phi) {
  if (static_cast<int>(phi.size()) != net.n) throw std::invalid_argument("incidence_transpose_apply: length mismatch");
  std::vector<double> out(net.m());
  for (int e = 0; e < net.m(); ++e) out[e] = phi[net.edges[e].head] - phi[net.edges[e].tail];
  return out;
}

FlowSolution make_flow_solution(const FlowNetwork& net, std::vector<double> f, double value) {
  FlowSolution sol;
  sol.achieved = incidence_apply(net, f);
  sol.congestion.resize(f.size());
  for (int e = 0; e < net.m(); ++e) sol.congestion[e] = f[e] / net.edges[e].capacity;
  sol.flow = std::move(f);
  sol.value = value;
  return sol;
}

namespace {

// Tokenizer over one line that remembers columns for error reporting.
struct LineCursor {
  const std::string& line;
  int line_no;
  std::size_t pos = 0;

  bool at_end() {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    return pos >= line.size();
  }
  std::string word(const char* what) {
    if (at_end()) throw ParseError(std::string("expected ") + what, line_no, static_cast<int>(pos) + 1);
    std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    return line.substr(start, pos - start);
  }
  long long integer(const char* what) {
    at_end();
    int col = static_cast<int>(pos) + 1;
    std::string w = word(what);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size() || w.empty()) throw ParseError(std::string("invalid integer for ") + what, line_no, col);
    return v;
  }
  double real(const char* what) {
    at_end();
    int col = static_cast<int>(pos) + 1;
    std::string w = word(what);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size() || w.empty() || !std::isfinite(v))
      throw ParseError(std::string("invalid number for ") + what, line_no, col);
    return v;
  }
  void finish() {
    if (!at_end()) throw ParseError("trailing characters", line_no, static_cast<int>(pos) + 1);
  }
};

}  // namespace

MatrixFile read_matrix(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  long long rows = 0, cols = 0, nnz = 0;
  std::vector<Triplet> trips;
  std::vector<double> rhs;
  while (std::getline(in, line)) {
    ++line_no;
    LineCursor cur{line, line_no};
    if (cur.at_end() || line[cur.pos] == '#') continue;
    if (!have_header) {
      if (cur.word("header") != "linf-matrix") throw ParseError("expected 'linf-matrix' header", line_no, 1);
      if (cur.word("version") != "v1") throw ParseError("unsupported version", line_no, static_cast<int>(cur.pos));
      rows = cur.integer("row count");
      cols = cur.integer("column count");
      nnz = cur.integer("nonzero count");
      cur.finish();
      if (rows < 0 || cols < 0 || nnz < 0) throw ParseError("negative size in header", line_no, 1);
      rhs.assign(rows, 0.0);
      have_header = true;
      continue;
    }
    if (line[cur.pos] == 'b') {
      // Right-hand side entry: "b <i> <value>".
      cur.word("tag");
      int col = static_cast<int>(cur.pos) + 2;
      long long i = cur.integer("rhs index");
      if (i < 0 || i >= rows) throw ParseError("rhs index out of range", line_no, col);
      rhs[i] = cur.real("rhs value");
      cur.finish();
      continue;
    }
    int col = static_cast<int>(cur.pos) + 1;
    long long i = cur.integer("row index");
    long long j = cur.integer("column index");
    double v = cur.real("value");
    cur.finish();
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw ParseError("entry index out of range", line_no, col);
    trips.push_back({static_cast<int>(i), static_cast<int>(j), v});
  }
  if (!have_header) throw ParseError("missing header", line_no + 1, 1);
  if (static_cast<long long>(trips.size()) != nnz)
    throw ParseError("entry count does not match header", line_no + 1, 1);
  MatrixFile out;
  try {
    out.matrix = build_from_triplets(std::move(trips), static_cast<int>(rows), static_cast<int>(cols));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no, 1);
  }
  out.rhs = std::move(rhs);
  return out;
}

void write_matrix(std::ostream& out, const SparseMatrix& a, const std::vector<double>& rhs) {
  char buf[64];
  out << "linf-matrix v1 " << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  for (const auto& t : a.triplets_by_col()) {
    std::snprintf(buf, sizeof buf, "%.17g", t.value);
    out << t.row << ' ' << t.col << ' ' << buf << '\n';
  }
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (rhs[i] == 0.0) continue;
    std::snprintf(buf, sizeof buf, "%.17g", rhs[i]);
    out << "b " << i << ' ' << buf << '\n';
  }
}

FlowNetwork read_dimacs(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_problem = false;
  bool undirected = false;
  long long declared_arcs = 0;
  FlowNetwork net;
  while (std::getline(in, line)) {
    ++line_no;
    LineCursor cur{line, line_no};
    if (cur.at_end()) continue;
    std::string tag = cur.word("line tag");
    if (tag == "c") {
      if (!cur.at_end() && cur.word("comment") == "undirected" && cur.at_end()) {
        if (have_problem) throw ParseError("'c undirected' must precede the problem line", line_no, 1);
        undirected = true;
      }
      continue;
    }
    if (tag == "p") {
      if (have_problem) throw ParseError("duplicate problem line", line_no, 1);
      if (cur.word("problem kind") != "max") throw ParseError("expected 'p max'", line_no, 3);
      long long n = cur.integer("vertex count");
      declared_arcs = cur.integer("arc count");
      cur.finish();
      if (n < 1 || declared_arcs < 0) throw ParseError("invalid problem sizes", line_no, 7);
      net.n = static_cast<int>(n);
      net.directed = !undirected;
      net.demand.assign(net.n, 0.0);
      have_problem = true;
      continue;
    }
    if (!have_problem) throw ParseError("line before problem line", line_no, 1);
    if (tag == "n") {
      int col = static_cast<int>(cur.pos) + 2;
      long long id = cur.integer("node id");
      if (id < 1 || id > net.n) throw ParseError("node id out of range", line_no, col);
      std::string kind = cur.word("node kind");
      cur.finish();
      if (kind == "s") net.source = static_cast<int>(id - 1);
      else if (kind == "t") net.sink = static_cast<int>(id - 1);
      else throw ParseError("node kind must be s or t", line_no, static_cast<int>(cur.pos));
      continue;
    }
    if (tag == "a") {
      int col = static_cast<int>(cur.pos) + 2;
      long long u = cur.integer("arc tail");
      long long v = cur.integer("arc head");
      int cap_col = static_cast<int>(cur.pos) + 2;
      double cap = cur.real("capacity");
      cur.finish();
      if (u < 1 || v < 1 || u > net.n || v > net.n) throw ParseError("arc endpoint out of range", line_no, col);
      if (!(cap > 0.0)) throw ParseError("capacity must be positive", line_no, cap_col);
      if (u == v) continue;  // self-loops carry no flow
      net.add_edge(static_cast<int>(u - 1), static_cast<int>(v - 1), cap);
      continue;
    }
    throw ParseError("unknown line tag '" + tag + "'", line_no, 1);
  }
  if (!have_problem) throw ParseError("missing problem line", line_no + 1, 1);
  (void)declared_arcs;
  return net;
}

void write_dimacs(std::ostream& out, const FlowNetwork& net) {
  if (!net.directed) out << "c undirected\n";
  out << "p max " << net.n << ' ' << net.m() << '\n';
  if (net.source >= 0) out << "n " << net.source + 1 << " s\n";
  if (net.sink >= 0) out << "n " << net.sink + 1 << " t\n";
  char buf[64];
  for (const auto& e : net.edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.capacity);
    out << "a " << e.tail + 1 << ' ' << e.head + 1 << ' ' << buf << '\n';
  }
}

void write_flow(std::ostream& out, const FlowNetwork& net, const FlowSolution& sol) {
  char buf[96];
  for (int e = 0; e < net.m(); ++e) {
    std::snprintf(buf, sizeof buf, "%.12g", sol.flow[e]);
    out << "e " << net.edges[e].tail + 1 << ' ' << net.edges[e].head + 1 << ' ' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "value %.12g congestion %.12g", sol.value, sol.max_congestion());
  out << buf << '\n';
}

}  // namespace linf
