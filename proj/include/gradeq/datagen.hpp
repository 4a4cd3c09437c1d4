#ifndef GRADEQ_DATAGEN_HPP
#define GRADEQ_DATAGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/losses.hpp"
#include "gradeq/rng.hpp"
#include "gradeq/vec.hpp"

namespace gradeq {

/// One timestep of an input stream: a base prediction f, a response y,
/// optional group-indicator/feature bits z, and (for battle streams) the two
/// competitor indices.
struct StreamRecord {
  double f = 0.0;
  double y = 0.0;
  Vec z;
  std::uint64_t x_id = 0;
  int model_a = -1;
  int model_b = -1;
};

struct Stream {
  std::vector<StreamRecord> records;
  std::vector<std::string> group_labels;
  bool disjoint_declared = false;

  std::size_t size() const { return records.size(); }
};

enum class StreamKind {
  iid_gaussian,
  piecewise_shift,
  drifting_mean,
  bernoulli_calibrated,
  bradley_terry,
};

struct Segment {
  std::size_t length = 0;
  double mu = 0.0;
  double sigma = 1.0;
};

enum class GroupingKind { none, disjoint, overlapping };

struct GroupingSpec {
  GroupingKind kind = GroupingKind::none;
  // disjoint: category proportions (sum 1); overlapping: per-group activation
  // probabilities.
  std::vector<double> weights;
  std::vector<std::string> labels;

  std::size_t dim() const { return weights.size(); }
};

/// Deterministic synthetic stream description. Regression kinds define the
/// law of the residual y - f; the base prediction f is drawn N(0,1) so the
/// pipelines see a nontrivial predictor. Per-group offsets shift the
/// residual (regression) or the true event probability away from the
/// reported base probability (classification), injecting the miscalibration
/// the debiasing pipelines are meant to remove.
struct StreamSpec {
  StreamKind kind = StreamKind::iid_gaussian;
  std::size_t length = 0;
  std::uint64_t seed = 1;

  double mu = 0.0, sigma = 1.0;       // iid_gaussian
  std::vector<Segment> segments;      // piecewise_shift
  double drift_rate = 0.0;            // drifting_mean: mean = rate * (t-1)
  double p_lo = 0.1, p_hi = 0.9;      // bernoulli_calibrated base probability range
  std::size_t num_models = 0;         // bradley_terry
  std::vector<double> strengths;
  GroupingSpec groups;
  std::vector<double> group_offsets;  // per-group miscalibration
  std::optional<double> bound_b;      // clip |y - f| to [-b, b]

  void validate() const {
    if (length == 0) throw std::invalid_argument("StreamSpec: length must be positive");
    switch (kind) {
      case StreamKind::piecewise_shift: {
        if (segments.empty())
          throw std::invalid_argument("StreamSpec: piecewise-shift needs segments");
        for (const auto& s : segments)
          if (s.length == 0) throw std::invalid_argument("StreamSpec: zero-length segment");
        break;
      }
      case StreamKind::bradley_terry: {
        if (num_models < 2)
          throw std::invalid_argument("StreamSpec: bradley-terry needs >= 2 models");
        if (strengths.size() != num_models)
          throw std::invalid_argument("StreamSpec: strengths must match num_models");
        if (!all_finite(strengths))
          throw std::invalid_argument("StreamSpec: non-finite strengths");
        break;
      }
      default:
        break;
    }
    if (groups.kind == GroupingKind::disjoint) {
      double s = 0.0;
      for (double w : groups.weights) {
        if (w < 0.0) throw std::invalid_argument("StreamSpec: negative proportion");
        s += w;
      }
      if (std::fabs(s - 1.0) > 1e-9)
        throw std::invalid_argument("StreamSpec: proportions must sum to 1");
    }
    if (!group_offsets.empty() && group_offsets.size() != groups.dim())
      throw std::invalid_argument("StreamSpec: group_offsets must match group count");
    if (bound_b && !(*bound_b > 0.0))
      throw std::invalid_argument("StreamSpec: bound b must be positive");
  }
};

namespace detail {

inline void assign_groups(const GroupingSpec& gs, CounterRng& rng, StreamRecord& rec) {
  if (gs.kind == GroupingKind::none) return;
  rec.z.assign(gs.dim(), 0.0);
  if (gs.kind == GroupingKind::disjoint) {
    double u = rng.next_double();
    double acc = 0.0;
    std::size_t pick = gs.dim() - 1;
    for (std::size_t j = 0; j < gs.dim(); ++j) {
      acc += gs.weights[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    rec.z[pick] = 1.0;
  } else {
    for (std::size_t j = 0; j < gs.dim(); ++j)
      if (rng.next_bernoulli(gs.weights[j])) rec.z[j] = 1.0;
  }
}

inline double active_offset(const StreamSpec& spec, const StreamRecord& rec) {
  if (spec.group_offsets.empty() || rec.z.empty()) return 0.0;
  double off = 0.0;
  for (std::size_t j = 0; j < rec.z.size(); ++j)
    if (rec.z[j] != 0.0) off += spec.group_offsets[j];
  return off;
}

inline std::vector<std::string> default_labels(std::size_t d,
                                               const std::vector<std::string>& given) {
  if (!given.empty()) return given;
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back("g" + std::to_string(j));
  return out;
}

}  // namespace detail

/// Deterministic generation: identical spec + seed gives identical output.
inline Stream generate(const StreamSpec& spec) {
  spec.validate();
  Stream stream;
  stream.group_labels = detail::default_labels(spec.groups.dim(), spec.groups.labels);
  stream.disjoint_declared = spec.groups.kind == GroupingKind::disjoint;
  CounterRng base(spec.seed);
  CounterRng group_rng = base.substream(1);
  CounterRng value_rng = base.substream(2);
  CounterRng label_rng = base.substream(3);

  if (spec.kind == StreamKind::bradley_terry) {
    for (std::size_t t = 0; t < spec.length; ++t) {
      StreamRecord rec;
      rec.x_id = t;
      auto a = static_cast<int>(value_rng.next_below(spec.num_models));
      auto b = static_cast<int>(value_rng.next_below(spec.num_models - 1));
      if (b >= a) ++b;
      rec.model_a = a;
      rec.model_b = b;
      rec.f = sigmoid(spec.strengths[static_cast<std::size_t>(b)] -
                      spec.strengths[static_cast<std::size_t>(a)]);
      rec.y = label_rng.next_bernoulli(rec.f) ? 1.0 : 0.0;
      stream.records.push_back(std::move(rec));
    }
    return stream;
  }

  // segment lookup for piecewise shifts
  auto segment_at = [&](std::size_t t) -> Segment {
    std::size_t pos = t;
    for (const auto& s : spec.segments) {
      if (pos < s.length) return s;
      pos -= s.length;
    }
    return spec.segments.back();
  };

  for (std::size_t t = 0; t < spec.length; ++t) {
    StreamRecord rec;
    rec.x_id = t;
    detail::assign_groups(spec.groups, group_rng, rec);
    double offset = detail::active_offset(spec, rec);

    if (spec.kind == StreamKind::bernoulli_calibrated) {
      double p = value_rng.next_uniform(spec.p_lo, spec.p_hi);
      double q = std::clamp(p + offset, 0.01, 0.99);
      rec.f = p;
      rec.y = label_rng.next_bernoulli(q) ? 1.0 : 0.0;
    } else {
      double mu = spec.mu, sigma = spec.sigma;
      if (spec.kind == StreamKind::piecewise_shift) {
        Segment s = segment_at(t);
        mu = s.mu;
        sigma = s.sigma;
      } else if (spec.kind == StreamKind::drifting_mean) {
        mu = spec.drift_rate * static_cast<double>(t);
      }
      double resid = mu + sigma * value_rng.next_gaussian() + offset;
      if (spec.bound_b) resid = std::clamp(resid, -*spec.bound_b, *spec.bound_b);
      rec.f = label_rng.next_gaussian();
      rec.y = rec.f + resid;
      if (spec.bound_b) {
        // rounding of f + resid can push the recomputed residual one ulp
        // past the bound; nudge y back toward f until it holds
        double b = *spec.bound_b;
        while (std::fabs(rec.y - rec.f) > b)
          rec.y = std::nextafter(rec.y, rec.f);
      }
    }
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

/// Conformal-style bounded scores: s_t = clamp(y_t - f_t, -b, b).
inline std::vector<double> bounded_scores(const StreamSpec& spec, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("bounded_scores: b must be > 0");
  Stream s = generate(spec);
  std::vector<double> out;
  out.reserve(s.size());
  for (const auto& rec : s.records)
    out.push_back(std::clamp(rec.y - rec.f, -b, b));
  return out;
}

}  // namespace gradeq

#endif
