#ifndef SPHERE_PINCH_PIECEWISE_HPP
#define SPHERE_PINCH_PIECEWISE_HPP

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sphere_pinch {

/// Closed-form expression kinds used by warping functions. The names double
/// as the expression ids of the text profile format.
enum class SegmentKind {
  ScaledSine,           ///< A sin(w r + p)
  ScaledCosineShifted,  ///< A cos(w r + p)
  AffineCosineBlend,    ///< A cos(w r) + C
};

inline std::string_view segment_kind_id(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::ScaledSine: return "scaled-sine";
    case SegmentKind::ScaledCosineShifted: return "scaled-cosine-shifted";
    case SegmentKind::AffineCosineBlend: return "affine-cosine-blend";
  }
  return "?";
}

inline SegmentKind parse_segment_kind(std::string_view id) {
  if (id == "scaled-sine") return SegmentKind::ScaledSine;
  if (id == "scaled-cosine-shifted") return SegmentKind::ScaledCosineShifted;
  if (id == "affine-cosine-blend") return SegmentKind::AffineCosineBlend;
  throw FormatError("unknown expression id '" + std::string(id) + "'");
}

/// One closed-form piece. Parameters are kept in extended precision because
/// the pinch constants suffer cancellation at large k.
struct Segment {
  SegmentKind kind = SegmentKind::ScaledSine;
  long double amplitude = 1.0L;
  long double frequency = 1.0L;
  long double third = 0.0L;  // phase for the sine/cosine kinds, offset C for the blend

  [[nodiscard]] long double eval(long double r, int order) const {
    const long double w = frequency;
    switch (kind) {
      case SegmentKind::ScaledSine: {
        const long double x = w * r + third;
        if (order == 0) return amplitude * std::sin(x);
        if (order == 1) return amplitude * w * std::cos(x);
        return -amplitude * w * w * std::sin(x);
      }
      case SegmentKind::ScaledCosineShifted: {
        const long double x = w * r + third;
        if (order == 0) return amplitude * std::cos(x);
        if (order == 1) return -amplitude * w * std::sin(x);
        return -amplitude * w * w * std::cos(x);
      }
      case SegmentKind::AffineCosineBlend: {
        const long double x = w * r;
        if (order == 0) return amplitude * std::cos(x) + third;
        if (order == 1) return -amplitude * w * std::sin(x);
        return -amplitude * w * w * std::cos(x);
      }
    }
    return 0.0L;
  }

  /// 1 - f'(r)^2 written as (1 - (A w)^2) + (A w)^2 c^2 so it stays accurate
  /// where |f'| is close to 1.
  [[nodiscard]] long double one_minus_d1_squared(long double r) const {
    const long double s = amplitude * frequency;
    long double c = 0.0L;
    switch (kind) {
      case SegmentKind::ScaledSine: c = std::sin(frequency * r + third); break;
      case SegmentKind::ScaledCosineShifted: c = std::cos(frequency * r + third); break;
      case SegmentKind::AffineCosineBlend: c = std::cos(frequency * r); break;
    }
    return (1.0L - s * s) + s * s * c * c;
  }

  [[nodiscard]] Segment scaled(long double factor) const {
    Segment s = *this;
    s.amplitude *= factor;
    if (kind == SegmentKind::AffineCosineBlend) s.third *= factor;
    return s;
  }
};

/// Scalar function of the radial coordinate on [0, R], given by closed-form
/// segments between ordered breakpoints.
///
/// Invariants: breakpoints strictly increase from 0 to R, one segment per
/// interval. C1 continuity across interior breakpoints is a property of the
/// data and is checked by `max_c1_jump`, not enforced here.
class PiecewiseSmoothFunction {
public:
  PiecewiseSmoothFunction() = default;

  PiecewiseSmoothFunction(std::vector<long double> breakpoints, std::vector<Segment> segments)
      : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (breakpoints_.size() < 2 || segments_.size() + 1 != breakpoints_.size())
      throw DomainError("piecewise function needs k+1 breakpoints for k segments");
    if (breakpoints_.front() != 0.0L)
      throw DomainError("first breakpoint must be 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw DomainError("breakpoints must be strictly increasing");
  }

  [[nodiscard]] const std::vector<long double>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  [[nodiscard]] long double length() const { return breakpoints_.back(); }

  /// Index of the segment active at r; interior breakpoints belong to the right segment.
  [[nodiscard]] std::size_t segment_index(long double r) const {
    check_range(r);
    std::size_t i = 0;
    while (i + 1 < segments_.size() && r >= breakpoints_[i + 1]) ++i;
    return i;
  }

  [[nodiscard]] long double eval_ld(long double r, int order) const {
    if (order < 0 || order > 2) throw DomainError("derivative order must be 0, 1 or 2");
    return segments_[segment_index(r)].eval(r, order);
  }

  [[nodiscard]] double eval(double r, int order) const {
    return static_cast<double>(eval_ld(static_cast<long double>(r), order));
  }

  [[nodiscard]] double operator()(double r) const { return eval(r, 0); }

  [[nodiscard]] long double one_minus_d1_squared(long double r) const {
    return segments_[segment_index(r)].one_minus_d1_squared(r);
  }

  /// True when r coincides (to `tol`) with an interior breakpoint.
  [[nodiscard]] bool near_interior_breakpoint(double r, double tol) const {
    for (std::size_t i = 1; i + 1 < breakpoints_.size(); ++i)
      if (std::abs(static_cast<long double>(r) - breakpoints_[i]) <= tol) return true;
    return false;
  }

  /// Largest jump in value or first derivative across interior breakpoints.
  [[nodiscard]] long double max_c1_jump() const {
    long double worst = 0.0L;
    for (std::size_t i = 1; i < breakpoints_.size() - 1; ++i) {
      const long double r = breakpoints_[i];
      for (int order = 0; order <= 1; ++order) {
        const long double jump =
            std::abs(segments_[i - 1].eval(r, order) - segments_[i].eval(r, order));
        if (jump > worst) worst = jump;
      }
    }
    return worst;
  }

  [[nodiscard]] PiecewiseSmoothFunction scaled(long double factor) const {
    std::vector<Segment> segs;
    segs.reserve(segments_.size());
    for (const auto& s : segments_) segs.push_back(s.scaled(factor));
    return {breakpoints_, std::move(segs)};
  }

private:
  void check_range(long double r) const {
    // Accept the double-rounded endpoint R.
    const long double slack = 1e-14L * (1.0L + breakpoints_.back());
    if (!(r >= 0.0L) || r > breakpoints_.back() + slack) {
      std::ostringstream os;
      os << "radius " << static_cast<double>(r) << " outside [0, "
         << static_cast<double>(breakpoints_.back()) << "]";
      throw DomainError(os.str());
    }
  }

  std::vector<long double> breakpoints_;
  std::vector<Segment> segments_;
};

} // namespace sphere_pinch

#endif // SPHERE_PINCH_PIECEWISE_HPP
