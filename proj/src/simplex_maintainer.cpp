#include "linf/simplex_maintainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "linf/errors.hpp"
#include "linf/smoothing.hpp"

namespace linf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxGrowth = 1e6;

SparseVec combine(const SparseVec& v) {
  std::map<int, double> acc;
  for (const auto& [i, x] : v) acc[i] += x;
  SparseVec out;
  for (const auto& [i, x] : acc)
    if (x != 0.0) out.push_back({i, x});
  return out;
}

}  // namespace

std::vector<double> SimplexOracle::log_weights() const {
  std::vector<double> v(size());
  for (int i = 0; i < size(); ++i) v[i] = log_weight(i);
  return v;
}

std::vector<double> SimplexOracle::log_weights_half() const {
  std::vector<double> v(size());
  for (int i = 0; i < size(); ++i) v[i] = log_weight_half(i);
  return v;
}

void SimplexOracle::update_half(const std::vector<double>& delta) {
  for (int i = 0; i < size(); ++i)
    if (delta[i] != this->delta(i)) set_delta(i, delta[i]);
  update_half();
}

void SimplexOracle::update(const std::vector<double>& delta, const SparseVec& zeta) {
  for (int i = 0; i < size(); ++i)
    if (delta[i] != this->delta(i)) set_delta(i, delta[i]);
  update(zeta);
}

// ---------------------------------------------------------------- naive twin

NaiveSimplex::NaiveSimplex(int n, double c) : c_(c), v_(n, 0.0), d_(n, 0.0) {
  if (n < 1) throw std::invalid_argument("NaiveSimplex: need at least one coordinate");
}

void NaiveSimplex::init(const std::vector<double>& v) {
  v_ = v;
  std::fill(d_.begin(), d_.end(), 0.0);
  dirty_ = true;
}

void NaiveSimplex::set_delta(int i, double value) {
  d_[i] = value;
  dirty_ = true;
}

void NaiveSimplex::update_half() { dirty_ = true; }

void NaiveSimplex::update(const SparseVec& zeta) {
  const double c2 = 1.0 - c_ + c_ * c_, c3 = 1.0 - c_;
  for (int i = 0; i < size(); ++i) v_[i] = c2 * v_[i] - c3 * d_[i];
  for (const auto& [i, z] : zeta) v_[i] -= z;
  dirty_ = true;
}

void NaiveSimplex::refresh() {
  if (!dirty_) return;
  std::vector<double> h(v_.size()), s(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) {
    h[i] = log_weight_half(static_cast<int>(i));
    s[i] = 0.5 * v_[i];
  }
  lz_ = log_sum_exp(v_);
  lz_half_ = log_sum_exp(h);
  lz_sqrt_ = log_sum_exp(s);
  dirty_ = false;
}

double NaiveSimplex::coord(int i) {
  refresh();
  return std::exp(v_[i] - lz_);
}

double NaiveSimplex::coord_half(int i) {
  refresh();
  return std::exp(log_weight_half(i) - lz_half_);
}

double NaiveSimplex::sqrt_coord(int i) {
  refresh();
  return std::exp(0.5 * v_[i] - lz_sqrt_);
}

std::pair<int, double> NaiveSimplex::sample(Rng& rng, double power) {
  refresh();
  const double lz = power == 1.0 ? lz_ : lz_sqrt_;
  double u = rng.uniform();
  int last = 0;
  for (int i = 0; i < size(); ++i) {
    const double p = std::exp(power * v_[i] - lz);
    if (p > 0.0) last = i;
    if (u < p) return {i, p};
    u -= p;
  }
  return {last, std::exp(power * v_[last] - lz)};
}

// ---------------------------------------------------------------- sparse representation

namespace {

[[maybe_unused]] LogWeightRep::Mat mul(const LogWeightRep::Mat& a, const LogWeightRep::Mat& b) {
  LogWeightRep::Mat r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

LogWeightRep::Mat inverse(const LogWeightRep::Mat& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (det == 0.0) throw std::invalid_argument("LogWeightRep: singular recursion matrix");
  LogWeightRep::Mat r;
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

constexpr LogWeightRep::Mat kIdentity{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

}  // namespace

LogWeightRep::LogWeightRep(double c) : c_(c) {
  c1_ = 2.0 - c + c * c;
  c2_ = 1.0 - c + c * c;
  c3_ = 1.0 - c;
  m_ = {{{c1_, c3_, 1.0}, {0.0, 1.0, 0.0}, {-c2_, -c3_, 0.0}}};
  m_inv_ = inverse(m_);
  mt_ = kIdentity;
  mt_inv_ = kIdentity;
}

void LogWeightRep::init(const std::vector<double>& v, const std::vector<double>& delta) {
  a_ = v;
  d_ = delta;
  zeta_.assign(v.size(), 0.0);
  zeta_support_.clear();
  mt_ = kIdentity;
  mt_inv_ = kIdentity;
  ct_ = 1.0;
  g_ = 0.0;
  t_ = 0;
}

void LogWeightRep::step(const SparseVec& mu, const SparseVec& nu) {
  // delta_t takes effect without moving v_t.
  for (const auto& [i, x] : mu) {
    d_[i] += x;
    a_[i] += c3_ * g_ * x / ct_;
  }
  for (const auto& [i, x] : nu) {
    if (zeta_[i] == 0.0 && x != 0.0) zeta_support_.push_back(i);
    zeta_[i] += x;
  }
  const double next = ct_ * c2_;
  std::vector<int> keep;
  for (int i : zeta_support_) {
    if (zeta_[i] == 0.0) continue;
    a_[i] -= zeta_[i] / next;
    keep.push_back(i);
  }
  zeta_support_ = std::move(keep);
  ct_ = next;
  g_ = c2_ * g_ + 1.0;
  mt_ = mul(mt_, m_);
  mt_inv_ = mul(m_inv_, mt_inv_);
  ++t_;
}

void LogWeightRep::squish(int i, double amount) { a_[i] += amount / ct_; }

double LogWeightRep::v(int i) const { return ct_ * a_[i] - c3_ * g_ * d_[i]; }

double LogWeightRep::v_prev(int i) const {
  if (t_ == 0) return (v(i) + c3_ * d_[i]) / c2_;
  return (v(i) + c3_ * d_[i] + zeta_[i]) / c2_;
}

double LogWeightRep::v_prev_half(int i) const { return c3_ * v_prev(i) - d_[i]; }

// ---------------------------------------------------------------- bucketed maintainer
//
// Inside a bucket anchored at time tb, a member that no sparse update has touched since then obeys
//   v_t = c2^(t - tb) w - c3 G_t D
// where D is its current delta entry and G_t = sum_{k<t} c2^k counts from the window start.
// Writing w = ref + wh with ref the largest anchor,
//   exp(rho v_t) = exp(rho c2^k ref) exp(rho wh) exp(rho (c2^k - 1) wh - rho c3 G_t D),
// and the last factor is expanded to degree d, so a bucket's sum only needs the moments
//   sum exp(rho wh) wh^a D^e,  a + e <= d.
// The half step is the same with c3 c2^k in place of c2^k and c3^2 G_t + 1 in place of c3 G_t.

SimplexMaintainer::SimplexMaintainer(int n, double c, double epsilon, double tau)
    : n_(n), c_(c), eps_(epsilon), tau_(tau), rep_(c) {
  if (n < 1) throw std::invalid_argument("SimplexMaintainer: need at least one coordinate");
  if (!(c >= 0.0 && c < 0.5)) throw std::invalid_argument("SimplexMaintainer: contraction must lie in [0, 1/2)");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("SimplexMaintainer: tau must lie in (0, 1)");
  c2_ = 1.0 - c + c * c;
  c3_ = 1.0 - c;
  window_ = 16.0 * std::log(std::max(n, 2)) / std::min(epsilon, 1.0 / 7.0);
  degree_ = std::max(8, static_cast<int>(std::ceil(std::log2(8.0 / tau))));
  offset_.resize(degree_ + 2);
  offset_[0] = 0;
  for (int a = 0; a <= degree_; ++a) offset_[a + 1] = offset_[a] + (degree_ + 1 - a);
  n_moments_ = offset_[degree_ + 1];
  inv_fact_.resize(degree_ + 1);
  inv_fact_[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) inv_fact_[k] = inv_fact_[k - 1] / k;
  c2_pow_.resize(n + 2);
  c2_pow_[0] = 1.0;
  for (int k = 1; k < n + 2; ++k) c2_pow_[k] = c2_pow_[k - 1] * c2_;
  d_.assign(n, 0.0);
  d_start_.assign(n, 0.0);
  d_flag_.assign(n, 0);
  bucket_of_.assign(n, -1);
  slot_of_.assign(n, -1);
  last_type2_deletions_.assign(64, 0);
  type2_seen_.assign(64, 0);
  init(std::vector<double>(n, 0.0));
}

int SimplexMaintainer::rank_of(int size) const {
  int r = 0;
  while ((1 << r) < size) ++r;
  return r;
}

double SimplexMaintainer::anchor_value(int i, const Bucket& b) const {
  const long k = window_t_ - b.anchor_time;
  return (rep_.v(i) + c3_ * g_ * d_[i]) / c2_pow_[k];
}

void SimplexMaintainer::add_member(Bucket& b, int slot, int sign) {
  const double wh = b.what[slot], dv = b.dval[slot];
  for (int p = 0; p < 2; ++p) {
    const double rho = p == 0 ? 1.0 : 0.5;
    std::vector<double>& mom = b.moments[p];
    double pa = sign * std::exp(rho * wh);
    for (int a = 0; a <= degree_; ++a) {
      double term = pa;
      const int base = offset_[a];
      for (int e = 0; e <= degree_ - a; ++e) {
        mom[base + e] += term;
        term *= dv;
      }
      pa *= wh;
    }
    b.anchors[p].update(slot, sign > 0 ? std::exp(rho * wh) : 0.0);
  }
  stats_.touched += 2 * n_moments_;
}

int SimplexMaintainer::make_bucket(const std::vector<int>& coords, bool squish) {
  Bucket b;
  b.id = next_id_++;
  b.anchor_time = window_t_;
  const int k = static_cast<int>(coords.size());
  b.slot_coord = coords;
  b.what.resize(k);
  b.dval.resize(k);
  b.ref = kNegInf;
  for (int s = 0; s < k; ++s) {
    b.what[s] = anchor_value(coords[s], b);
    b.ref = std::max(b.ref, b.what[s]);
  }
  for (int s = 0; s < k; ++s) {
    const int i = coords[s];
    if (squish && b.what[s] < b.ref - window_) {
      const double amount = b.ref - window_ - b.what[s];
      rep_.squish(i, amount);
      b.what[s] += amount;
      ++stats_.squished;
    }
    b.what[s] -= b.ref;
    b.dval[s] = d_[i];
    b.max_what = std::max(b.max_what, std::abs(b.what[s]));
    b.max_d = std::max(b.max_d, std::abs(b.dval[s]));
  }
  b.live = k;
  b.credits = (1L << rank_of(k)) - k;
  for (int p = 0; p < 2; ++p) {
    b.moments[p].assign(n_moments_, 0.0);
    b.anchors[p] = SumTree(k);
  }
  const int idx = static_cast<int>(buckets_.size());
  buckets_.push_back(std::move(b));
  live_.insert(idx);
  Bucket& nb = buckets_.back();
  for (int s = 0; s < k; ++s) {
    bucket_of_[coords[s]] = idx;
    slot_of_[coords[s]] = s;
    add_member(nb, s, +1);
  }
  return idx;
}

void SimplexMaintainer::retire(int idx) {
  Bucket& b = buckets_[idx];
  b.alive = false;
  b.moments = {};
  b.anchors = {SumTree(0), SumTree(0)};
  live_.erase(idx);
}

void SimplexMaintainer::remove_from_bucket(int i) {
  Bucket& b = buckets_[bucket_of_[i]];
  const int slot = slot_of_[i];
  add_member(b, slot, -1);
  b.slot_coord[slot] = -1;
  --b.live;
  ++b.credits;
  ++stats_.deletions;
  const int idx = bucket_of_[i];
  bucket_of_[i] = -1;
  slot_of_[i] = -1;
  if (b.live == 0) retire(idx);
}

void SimplexMaintainer::reanchor(int i) {
  const int idx = bucket_of_[i];
  Bucket& b = buckets_[idx];
  const int slot = slot_of_[i];
  const double wh = anchor_value(i, b) - b.ref;
  add_member(b, slot, -1);
  b.what[slot] = wh;
  b.dval[slot] = d_[i];
  b.max_what = std::max(b.max_what, std::abs(wh));
  b.max_d = std::max(b.max_d, std::abs(d_[i]));
  // A member pushed above the reference or past the drift window forces a fresh anchor.
  if (wh > 0.5 || x_bound(b, 1.0, false) > 0.5 || x_bound(b, 1.0, true) > 0.5) {
    rebuild_bucket(idx);
    ++stats_.forced_rebuilds;
    return;
  }
  add_member(b, slot, +1);
}

void SimplexMaintainer::rebuild_bucket(int idx) {
  std::vector<int> coords;
  for (int i : buckets_[idx].slot_coord)
    if (i >= 0) coords.push_back(i);
  const int id = buckets_[idx].id;
  retire(idx);
  const int nb = make_bucket(coords, true);
  buckets_[nb].id = id;  // keeps its place in the merge order
  buckets_[nb].credits = buckets_[idx].credits;
}

void SimplexMaintainer::init(const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("SimplexMaintainer::init: length mismatch");
  std::fill(d_.begin(), d_.end(), 0.0);
  rep_.init(v, d_);
  window_t_ = 0;
  restart();
  --stats_.restarts;
}

void SimplexMaintainer::restart() {
  std::vector<double> v(n_);
  for (int i = 0; i < n_; ++i) v[i] = rep_.v(i);
  rep_.init(v, d_);
  window_t_ = 0;
  g_ = 0.0;
  buckets_.clear();
  live_.clear();
  zeta_prev_.clear();
  for (int i : d_touched_) d_flag_[i] = 0;
  d_touched_.clear();
  d_start_ = d_;
  // The fresh heap counts as a creation at every rank for the credit check.
  std::fill(type2_seen_.begin(), type2_seen_.end(), 1);
  std::fill(last_type2_deletions_.begin(), last_type2_deletions_.end(), stats_.deletions);
  std::vector<int> all(n_);
  for (int i = 0; i < n_; ++i) all[i] = i;
  make_bucket(all, true);
  ++stats_.restarts;
  ++version_;
}

void SimplexMaintainer::set_delta(int i, double value) {
  if (!(std::abs(value) <= 1.0 / (8.0 * n_) * (1.0 + 1e-12)))
    throw std::invalid_argument("SimplexMaintainer: |delta| exceeds 1/(8n)");
  if (value == d_[i]) return;
  if (!d_flag_[i]) {
    d_flag_[i] = 1;
    d_start_[i] = d_[i];
    d_touched_.push_back(i);
  }
  d_[i] = value;
  reanchor(i);
  ++version_;
}

void SimplexMaintainer::update_half() { ++version_; }

void SimplexMaintainer::update(const SparseVec& zeta_in) {
  SparseVec mu;
  for (int i : d_touched_) {
    if (d_[i] != d_start_[i]) mu.push_back({i, d_[i] - d_start_[i]});
    d_start_[i] = d_[i];
    d_flag_[i] = 0;
  }
  d_touched_.clear();
  const SparseVec zeta = combine(zeta_in);
  SparseVec nu = zeta;
  for (const auto& [i, z] : zeta_prev_) nu.push_back({i, -z});
  nu = combine(nu);

  // Stage 1: every bucket advances implicitly through t and G_t.
  rep_.step(mu, nu);
  ++window_t_;
  g_ = c2_ * g_ + 1.0;
  zeta_prev_ = zeta;

  // Stages 2 and 3, one coordinate at a time: a coordinate moved by zeta leaves its bucket for a fresh
  // singleton, then equal ranks merge bottom-up. Interleaving keeps the heap a binary counter.
  for (const auto& [i, z] : zeta) {
    remove_from_bucket(i);
    make_bucket({i}, false);
    merge_ranks();
  }
  merge_ranks();
  monitor();
  ++stats_.updates;
  ++version_;
  // Restart every n updates, or earlier when M^-t has grown enough to cost precision.
  if (window_t_ >= n_ || rep_.growth() > kMaxGrowth) restart();
}

void SimplexMaintainer::merge_ranks() {
  for (;;) {
    // Smallest rank holding two buckets; the two oldest merge first.
    std::map<int, std::vector<int>> by_rank;
    for (int b : live_) by_rank[rank_of(buckets_[b].live)].push_back(b);
    int first = -1, second = -1;
    for (auto& [r, list] : by_rank) {
      if (list.size() < 2) continue;
      std::sort(list.begin(), list.end(), [&](int x, int y) { return buckets_[x].id < buckets_[y].id; });
      first = list[0];
      second = list[1];
      break;
    }
    if (first < 0) {
      std::uint64_t most = 0;
      for (auto& [r, list] : by_rank) most = std::max<std::uint64_t>(most, list.size());
      stats_.max_buckets_per_rank = std::max(stats_.max_buckets_per_rank, most);
      return;
    }
    const Bucket& a = buckets_[first];
    const Bucket& b = buckets_[second];
    // A bucket that shrank below its creation rank makes this a Type 1 merge.
    const int created_a = static_cast<int>(a.slot_coord.size()), created_b = static_cast<int>(b.slot_coord.size());
    const bool type1 = rank_of(a.live) < rank_of(created_a) || rank_of(b.live) < rank_of(created_b);
    std::vector<int> coords;
    for (int i : a.slot_coord)
      if (i >= 0) coords.push_back(i);
    for (int i : b.slot_coord)
      if (i >= 0) coords.push_back(i);
    retire(first);
    retire(second);
    const int nb = make_bucket(coords, true);
    const int k = rank_of(buckets_[nb].live);
    if (type1) {
      ++stats_.type1_merges;
    } else {
      ++stats_.type2_merges;
      if (type2_seen_[k] && stats_.deletions - last_type2_deletions_[k] < (1ULL << (k > 0 ? k - 1 : 0)))
        ++stats_.credit_violations;
      type2_seen_[k] = 1;
      last_type2_deletions_[k] = stats_.deletions;
    }
  }
}

double SimplexMaintainer::x_bound(const Bucket& b, double power, bool half) const {
  const double ck = c2_pow_[window_t_ - b.anchor_time];
  const double alpha = half ? power * (c3_ * ck - 1.0) : power * (ck - 1.0);
  const double gamma = half ? power * (c3_ * c3_ * g_ + 1.0) : power * c3_ * g_;
  return std::abs(alpha) * b.max_what + std::abs(gamma) * b.max_d;
}

void SimplexMaintainer::monitor() {
  // Re-anchor any bucket whose Taylor argument could leave [-1/2, 1/2].
  const std::vector<int> current(live_.begin(), live_.end());
  for (int idx : current) {
    Bucket& b = buckets_[idx];
    if (x_bound(b, 1.0, false) <= 0.5 && x_bound(b, 1.0, true) <= 0.5) continue;
    rebuild_bucket(idx);
    ++stats_.forced_rebuilds;
  }
}

double SimplexMaintainer::drift_bound() const {
  double worst = 0.0;
  for (int idx : live_) worst = std::max(worst, x_bound(buckets_[idx], 1.0, false));
  return worst;
}

double SimplexMaintainer::bucket_log_sum(const Bucket& b, int power_idx, bool half) {
  const double rho = power_idx == 0 ? 1.0 : 0.5;
  const double ck = c2_pow_[window_t_ - b.anchor_time];
  const double lead = half ? rho * c3_ * ck * b.ref : rho * ck * b.ref;
  const double alpha = half ? rho * (c3_ * ck - 1.0) : rho * (ck - 1.0);
  const double gamma = half ? -rho * (c3_ * c3_ * g_ + 1.0) : -rho * c3_ * g_;
  const std::vector<double>& mom = b.moments[power_idx];
  double gpow[64];
  gpow[0] = 1.0;
  for (int e = 1; e <= degree_; ++e) gpow[e] = gpow[e - 1] * gamma;
  for (int e = 0; e <= degree_; ++e) gpow[e] *= inv_fact_[e];
  double total = 0.0, apow = 1.0;
  for (int a = 0; a <= degree_; ++a) {
    double inner = 0.0;
    const int base = offset_[a];
    for (int e = 0; e <= degree_ - a; ++e) inner += gpow[e] * mom[base + e];
    total += apow * inv_fact_[a] * inner;
    apow *= alpha;
  }
  stats_.touched += n_moments_;
  if (!(total > 0.0)) return kNegInf;
  return lead + std::log(total);
}

double SimplexMaintainer::log_total(int power_idx, bool half) {
  const int key = power_idx * 2 + (half ? 1 : 0);
  if (cache_version_[key] == version_ + 1) return cache_value_[key];
  double mx = kNegInf;
  std::vector<double> parts;
  for (int idx : live_) {
    const Bucket& b = buckets_[idx];
    parts.push_back(bucket_log_sum(b, power_idx, half));
    mx = std::max(mx, parts.back());
  }
  double acc = 0.0;
  for (double p : parts) acc += std::exp(p - mx);
  cache_value_[key] = mx + std::log(acc);
  cache_version_[key] = version_ + 1;
  return cache_value_[key];
}

double SimplexMaintainer::coord(int i) { return std::exp(rep_.v(i) - log_total(0, false)); }

double SimplexMaintainer::coord_half(int i) { return std::exp(log_weight_half(i) - log_total(0, true)); }

double SimplexMaintainer::sqrt_coord(int i) { return std::exp(0.5 * rep_.v(i) - log_total(1, false)); }

std::pair<int, double> SimplexMaintainer::sample(Rng& rng, double power) {
  const int pidx = power == 1.0 ? 0 : 1;
  if (pidx == 1 && power != 0.5) throw std::invalid_argument("SimplexMaintainer::sample: power must be 1 or 1/2");
  // Proposal: anchors inflated by each bucket's drift bound, so acceptance exp(x - X) <= 1.
  std::vector<int> ids;
  std::vector<double> logmass, lead, bound;
  double mx = kNegInf;
  for (int idx : live_) {
    const Bucket& b = buckets_[idx];
    if (!(b.anchors[pidx].total() > 0.0)) continue;
    const double ld = power * c2_pow_[window_t_ - b.anchor_time] * b.ref;
    const double xb = x_bound(b, power, false) + 1e-12;
    ids.push_back(idx);
    lead.push_back(ld);
    bound.push_back(xb);
    logmass.push_back(ld + xb + std::log(b.anchors[pidx].total()));
    mx = std::max(mx, logmass.back());
  }
  if (ids.empty()) throw SolverFault("SimplexMaintainer::sample: no live mass");
  std::vector<double> mass(ids.size());
  double total = 0.0;
  for (std::size_t k = 0; k < ids.size(); ++k) total += mass[k] = std::exp(logmass[k] - mx);
  for (int attempt = 0; attempt <= 64; ++attempt) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < ids.size() && u >= mass[k]) u -= mass[k++];
    const Bucket& b = buckets_[ids[k]];
    const int slot = b.anchors[pidx].sample(rng);
    const int i = b.slot_coord[slot];
    const double x = power * rep_.v(i) - (lead[k] + power * b.what[slot]);
    if (x > bound[k] + 1e-6)
      throw SolverFault("SimplexMaintainer::sample: drift invariant breached (x = " + std::to_string(x) +
                        ", bound = " + std::to_string(bound[k]) + ")");
    if (rng.uniform() < std::exp(x - bound[k])) return {i, std::exp(power * rep_.v(i) - log_total(pidx, false))};
    ++stats_.rejections;
  }
  throw SolverFault("SimplexMaintainer::sample: more than 64 consecutive rejections; drift bound " +
                    std::to_string(drift_bound()));
}

int SimplexMaintainer::bucket_count() const {
  return static_cast<int>(live_.size());
}

std::string SimplexMaintainer::debug_dump() const {
  std::ostringstream out;
  out << "window_t " << window_t_ << " buckets " << bucket_count() << '\n';
  for (const Bucket& b : buckets_) {
    if (!b.alive) continue;
    out << "bucket id " << b.id << " rank " << rank_of(b.live) << " size " << b.live << " credits " << b.credits
        << " anchored " << b.anchor_time << " drift " << x_bound(b, 1.0, false) << '\n';
  }
  return out.str();
}

std::string SimplexMaintainer::check_invariants() const {
  std::ostringstream err;
  std::vector<int> per_rank(64, 0);
  for (const Bucket& b : buckets_) {
    if (!b.alive) continue;
    if (b.credits < 0) err << "bucket " << b.id << " has negative credits\n";
    if (++per_rank[rank_of(b.live)] > 1) err << "two buckets of rank " << rank_of(b.live) << '\n';
    int live = 0;
    for (int s = 0; s < static_cast<int>(b.slot_coord.size()); ++s) {
      const int i = b.slot_coord[s];
      if (i < 0) continue;
      ++live;
      if (&buckets_[bucket_of_[i]] != &b || slot_of_[i] != s) err << "coordinate " << i << " membership mismatch\n";
      // Stored anchor must reproduce the exact log-weight.
      const long k = window_t_ - b.anchor_time;
      const double v = c2_pow_[k] * (b.ref + b.what[s]) - c3_ * g_ * d_[i];
      if (std::abs(v - rep_.v(i)) > 1e-8 * std::max(1.0, std::abs(v))) err << "coordinate " << i << " anchor drifted by " << v - rep_.v(i) << "\n";
      if (b.dval[s] != d_[i]) err << "coordinate " << i << " stale delta\n";
    }
    if (live != b.live) err << "bucket " << b.id << " live count mismatch\n";
    // Zeroth moments against a fresh sum over live members.
    for (int p = 0; p < 2; ++p) {
      const double rho = p == 0 ? 1.0 : 0.5;
      double fresh = 0.0;
      for (int s = 0; s < static_cast<int>(b.slot_coord.size()); ++s)
        if (b.slot_coord[s] >= 0) fresh += std::exp(rho * b.what[s]);
      if (std::abs(fresh - b.moments[p][0]) > 1e-9 * std::max(1.0, fresh))
        err << "bucket " << b.id << " moment drift " << fresh - b.moments[p][0] << '\n';
    }
  }
  for (int i = 0; i < n_; ++i)
    if (bucket_of_[i] < 0 || !buckets_[bucket_of_[i]].alive) err << "coordinate " << i << " has no bucket\n";
  return err.str();
}

}  // namespace linf
