#pragma once
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linf/rng.hpp"
#include "linf/sampler.hpp"

namespace linf {

using SparseVec = std::vector<std::pair<int, double>>;

// Implicit simplex point y proportional to exp(v_t) under the dual recursion
//   v_{t+1/2} = (1-c) v_t - delta_t
//   v_{t+1}   = v_t - c v_{t+1/2} - delta_t - zeta_t
// with delta_t dense but small and zeta_t sparse.
//
// Per iteration: set_delta for entries of delta_t that changed, update_half, half queries,
// then update(zeta_t) which advances t.
class SimplexOracle {
 public:
  virtual ~SimplexOracle() = default;
  virtual int size() const = 0;
  virtual double contraction() const = 0;
  // Discards all history and starts from log-weights v with delta = 0.
  virtual void init(const std::vector<double>& v) = 0;
  virtual void set_delta(int i, double value) = 0;
  virtual double delta(int i) const = 0;
  virtual void update_half() = 0;
  virtual void update(const SparseVec& zeta) = 0;

  virtual double log_weight(int i) const = 0;       // [v_t]_i
  virtual double log_weight_half(int i) const = 0;  // [v_{t+1/2}]_i
  virtual double coord(int i) = 0;                  // [y_t]_i
  virtual double coord_half(int i) = 0;             // [y_{t+1/2}]_i
  virtual double sqrt_coord(int i) = 0;             // sqrt(y_i) / sum sqrt(y)
  // Exact draw from exp(power * v_t) with power 1 or 1/2, and the probability of the draw.
  virtual std::pair<int, double> sample(Rng& rng, double power) = 0;

  std::vector<double> log_weights() const;
  std::vector<double> log_weights_half() const;

  // Dense-delta convenience forms.
  void update_half(const std::vector<double>& delta);
  void update(const std::vector<double>& delta, const SparseVec& zeta);
};

// Dense reference implementation: O(n) per operation.
class NaiveSimplex final : public SimplexOracle {
 public:
  using SimplexOracle::update;
  using SimplexOracle::update_half;
  NaiveSimplex(int n, double c);
  int size() const override { return static_cast<int>(v_.size()); }
  double contraction() const override { return c_; }
  void init(const std::vector<double>& v) override;
  void set_delta(int i, double value) override;
  double delta(int i) const override { return d_[i]; }
  void update_half() override;
  void update(const SparseVec& zeta) override;
  double log_weight(int i) const override { return v_[i]; }
  double log_weight_half(int i) const override { return (1.0 - c_) * v_[i] - d_[i]; }
  double coord(int i) override;
  double coord_half(int i) override;
  double sqrt_coord(int i) override;
  std::pair<int, double> sample(Rng& rng, double power) override;

 private:
  void refresh();
  double c_;
  std::vector<double> v_, d_;
  double lz_ = 0.0, lz_half_ = 0.0, lz_sqrt_ = 0.0;
  bool dirty_ = true;
};

// Sparse representation of the log-weight recursion. The triple (v_t, v_{t-1/2}, v_{t-1}) evolves by the
// fixed matrix M = [[c1, c3, 1], [0, 1, 0], [-c2, -c3, 0]], tracked incrementally with its inverse.
// Coordinates are stored as v_t = c2^t a - c3 G_t delta with G_0 = 0, G_{t+1} = c2 G_t + 1, so a
// step touches only the supports of delta_t - delta_{t-1} and zeta_t. This basis has no cancellation
// between large terms, unlike expanding against M^t directly when c is small.
class LogWeightRep {
 public:
  using Mat = std::array<std::array<double, 3>, 3>;

  explicit LogWeightRep(double c = 0.0);
  // Window start from v_0 with a virtual history consistent with delta_{-1} = delta, zeta_{-1} = 0.
  void init(const std::vector<double>& v, const std::vector<double>& delta);
  // mu = delta_t - delta_{t-1}, nu = zeta_t - zeta_{t-1}; advances t.
  void step(const SparseVec& mu, const SparseVec& nu);
  // Raise [v_t]_i by amount so the future recursion behaves as if it had always been higher.
  void squish(int i, double amount);

  double v(int i) const;
  double v_prev_half(int i) const;
  double v_prev(int i) const;
  long t() const { return t_; }
  const Mat& power() const { return mt_; }
  const Mat& inverse_power() const { return mt_inv_; }
  // c2^-t: scale of the stored anchors relative to the log-weights.
  double growth() const { return 1.0 / ct_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double c3() const { return c3_; }

 private:
  double c_, c1_, c2_, c3_;
  Mat m_, m_inv_, mt_, mt_inv_;
  std::vector<double> a_, d_, zeta_;
  std::vector<int> zeta_support_;
  double ct_ = 1.0, g_ = 0.0;
  long t_ = 0;
};

struct MaintainerStats {
  std::uint64_t touched = 0;        // moment entries written or read
  std::uint64_t updates = 0;
  std::uint64_t restarts = 0;
  std::uint64_t forced_rebuilds = 0;  // buckets re-anchored by the drift monitor
  std::uint64_t type1_merges = 0;
  std::uint64_t type2_merges = 0;
  std::uint64_t deletions = 0;
  std::uint64_t credit_violations = 0;  // Type-2 rank-k creations with < 2^(k-1) deletions since the previous one
  std::uint64_t squished = 0;
  std::uint64_t rejections = 0;
  std::uint64_t max_buckets_per_rank = 0;
};

// Bucketed Taylor maintainer of the exponential sums with exact rejection sampling.
class SimplexMaintainer final : public SimplexOracle {
 public:
  using SimplexOracle::update;
  using SimplexOracle::update_half;
  // epsilon sets the squish window 16 log n / min(epsilon, 1/7).
  SimplexMaintainer(int n, double c, double epsilon, double tau = 1e-6);

  int size() const override { return n_; }
  double contraction() const override { return c_; }
  void init(const std::vector<double>& v) override;
  void set_delta(int i, double value) override;
  double delta(int i) const override { return d_[i]; }
  void update_half() override;
  void update(const SparseVec& zeta) override;
  double log_weight(int i) const override { return rep_.v(i); }
  double log_weight_half(int i) const override { return c3_ * rep_.v(i) - d_[i]; }
  double coord(int i) override;
  double coord_half(int i) override;
  double sqrt_coord(int i) override;
  std::pair<int, double> sample(Rng& rng, double power) override;

  // Rebuild from the exact current log-weights; also runs automatically every n updates.
  void restart();

  int degree() const { return degree_; }
  double squish_window() const { return window_; }
  long window_counter() const { return window_t_; }
  const MaintainerStats& stats() const { return stats_; }
  // Largest |v0 - sigma - v| bound over live buckets at the current time.
  double drift_bound() const;
  // Bucket ranks, sizes and credits, one bucket per line.
  std::string debug_dump() const;
  // Checks membership, heap shape and per-bucket moments; returns an empty string when consistent.
  std::string check_invariants() const;
  int bucket_count() const;

 private:
  struct Bucket {
    int id = 0;
    long anchor_time = 0;
    double ref = 0.0;  // largest anchor at creation
    std::vector<int> slot_coord;  // -1 for ghosts
    std::vector<double> what, dval;
    int live = 0;
    double max_what = 0.0, max_d = 0.0;
    long credits = 0;
    std::array<std::vector<double>, 2> moments;
    std::array<SumTree, 2> anchors;
    bool alive = true;
  };

  int rank_of(int size) const;
  double anchor_value(int i, const Bucket& b) const;
  void add_member(Bucket& b, int slot, int sign);
  void reanchor(int i);
  int make_bucket(const std::vector<int>& coords, bool squish);
  void remove_from_bucket(int i);
  void merge_ranks();
  void monitor();
  double bucket_log_sum(const Bucket& b, int power_idx, bool half);
  double x_bound(const Bucket& b, double power, bool half) const;
  double log_total(int power_idx, bool half);

  int n_;
  double c_, c2_, c3_, eps_, tau_, window_;
  int degree_;
  int n_moments_;
  std::vector<int> offset_;
  std::vector<double> inv_fact_;
  LogWeightRep rep_;
  std::vector<double> d_;
  std::vector<double> d_start_;  // delta at the start of the iteration
  std::vector<int> d_touched_;
  std::vector<char> d_flag_;
  SparseVec zeta_prev_;
  std::vector<Bucket> buckets_;
  std::set<int> live_;  // indices of alive buckets
  void retire(int idx);
  void rebuild_bucket(int idx);
  std::vector<int> bucket_of_, slot_of_;
  long window_t_ = 0;
  double g_ = 0.0;  // G_t with G_0 = 0, G_{t+1} = c2 G_t + 1
  std::vector<double> c2_pow_;  // c2^k, k = 0..n
  std::uint64_t version_ = 0;
  std::array<std::uint64_t, 4> cache_version_{};
  std::array<double, 4> cache_value_{};
  std::vector<std::uint64_t> last_type2_deletions_;
  std::vector<char> type2_seen_;
  int next_id_ = 0;
  MaintainerStats stats_;
};

}  // namespace linf
