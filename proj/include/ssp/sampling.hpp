#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/linalg.hpp"
#include "ssp/rng.hpp"

namespace ssp {

/// Index tuple J_k drawn for one iteration, in draw order.
using Minibatch = std::vector<int>;

enum class Scheme { iid, without_replacement, partition };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::iid: return "iid";
    case Scheme::without_replacement: return "without_replacement";
    case Scheme::partition: return "partition";
  }
  return "?";
}

/// How minibatches are drawn from the finite index set {0, ..., p-1}:
/// independent draws from the marginal weights, sequential draws without
/// replacement with conditional renormalization, or a uniformly chosen block
/// of a fixed partition. Drawing mutates the generator, so a plan instance is
/// owned by a single solver run; the plan itself is immutable.
class SamplingPlan {
 public:
  static SamplingPlan iid(Vec weights, int batch_size) {
    return SamplingPlan(Scheme::iid, std::move(weights), batch_size, {});
  }

  static SamplingPlan without_replacement(Vec weights, int batch_size) {
    int support = 0;
    for (double w : weights) {
      if (w > 0.0) ++support;
    }
    if (batch_size > support) {
      throw ConfigError("SamplingPlan: without_replacement needs batch_size <= the number "
                        "of indices with positive weight");
    }
    return SamplingPlan(Scheme::without_replacement, std::move(weights), batch_size, {});
  }

  static SamplingPlan partition(Vec weights, std::vector<Minibatch> blocks) {
    if (blocks.empty()) throw ConfigError("SamplingPlan: partition needs >= 1 block");
    const int p = static_cast<int>(weights.size());
    const int block_size = static_cast<int>(blocks.front().size());
    std::vector<char> seen(p, 0);
    for (const Minibatch& b : blocks) {
      if (static_cast<int>(b.size()) != block_size) {
        throw ConfigError("SamplingPlan: partition blocks must have equal size");
      }
      for (int idx : b) {
        if (idx < 0 || idx >= p) throw ConfigError("SamplingPlan: block index out of range");
        if (seen[idx]) throw ConfigError("SamplingPlan: partition blocks must be disjoint");
        seen[idx] = 1;
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw ConfigError("SamplingPlan: partition blocks must cover every index");
    }
    return SamplingPlan(Scheme::partition, std::move(weights), block_size, std::move(blocks));
  }

  /// Same scheme and weights with a different batch size. Partition plans are
  /// re-blocked into consecutive chunks, which requires batch_size | p.
  SamplingPlan with_batch_size(int batch_size) const {
    switch (scheme_) {
      case Scheme::iid: return iid(weights_, batch_size);
      case Scheme::without_replacement: return without_replacement(weights_, batch_size);
      case Scheme::partition: {
        if (batch_size < 1 || omega_count() % batch_size != 0) {
          throw ConfigError("SamplingPlan: batch size must divide omega_count for partition");
        }
        std::vector<Minibatch> blocks;
        for (int start = 0; start < omega_count(); start += batch_size) {
          Minibatch b(batch_size);
          for (int i = 0; i < batch_size; ++i) b[i] = start + i;
          blocks.push_back(std::move(b));
        }
        return partition(weights_, std::move(blocks));
      }
    }
    throw ConfigError("SamplingPlan: unknown scheme");
  }

  int omega_count() const { return static_cast<int>(weights_.size()); }
  const Vec& weights() const { return weights_; }
  Scheme scheme() const { return scheme_; }
  int batch_size() const { return batch_size_; }
  const std::vector<Minibatch>& blocks() const { return blocks_; }

  /// One index distributed as the marginal weights (the SSP draw).
  int draw_single(Rng& rng) const { return pick(weights_, 1.0, rng.next_double()); }

  /// One minibatch J_k. Consumes a fixed number of uniforms per call for a
  /// given scheme, so streams replay identically across runs.
  Minibatch draw(Rng& rng) const {
    Minibatch batch;
    batch.reserve(batch_size_);
    switch (scheme_) {
      case Scheme::iid:
        for (int i = 0; i < batch_size_; ++i) batch.push_back(draw_single(rng));
        break;
      case Scheme::without_replacement: {
        Vec remaining = weights_;
        double total = 1.0;
        for (int i = 0; i < batch_size_; ++i) {
          int idx = pick(remaining, total, rng.next_double());
          batch.push_back(idx);
          total -= remaining[idx];
          remaining[idx] = 0.0;
        }
        break;
      }
      case Scheme::partition: {
        const int nblocks = static_cast<int>(blocks_.size());
        int b = std::min(static_cast<int>(rng.next_double() * nblocks), nblocks - 1);
        batch = blocks_[b];
        break;
      }
    }
    return batch;
  }

  /// The full support of the batch distribution. Only a partition has an
  /// enumerable support; for the other schemes use the spectral bound on the
  /// full constraint matrix or supply the parameter directly.
  std::vector<Minibatch> block_enumeration() const {
    if (scheme_ != Scheme::partition) {
      throw ConfigError(
          "block_enumeration: support is only enumerable for the partition scheme");
    }
    return blocks_;
  }

 private:
  SamplingPlan(Scheme scheme, Vec weights, int batch_size, std::vector<Minibatch> blocks)
      : scheme_(scheme),
        weights_(std::move(weights)),
        batch_size_(batch_size),
        blocks_(std::move(blocks)) {
    if (weights_.empty()) throw ConfigError("SamplingPlan: omega_count must be >= 1");
    if (batch_size_ < 1) throw ConfigError("SamplingPlan: batch_size must be >= 1");
    check_finite(weights_, "SamplingPlan weights");
    double sum = 0.0;
    for (double w : weights_) {
      if (w < 0.0) throw ConfigError("SamplingPlan: weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ConfigError("SamplingPlan: weights must sum to 1, got " + std::to_string(sum));
    }
  }

  /// Inverse-CDF pick of an index with mass proportional to weights/total.
  static int pick(const Vec& weights, double total, double u) {
    double target = u * total;
    double acc = 0.0;
    int last_nonzero = 0;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
      if (weights[i] <= 0.0) continue;
      last_nonzero = i;
      acc += weights[i];
      if (target < acc) return i;
    }
    return last_nonzero;  // float roundoff at the top end
  }

  Scheme scheme_;
  Vec weights_;
  int batch_size_;
  std::vector<Minibatch> blocks_;
};

}  // namespace ssp
