#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "batchlab/domain.hpp"

namespace batchlab {

/// Random engine used everywhere; runs are reproducible given the seed.
using Rng = std::mt19937_64;

/// Engine for stream `index` derived from a root seed. Streams are independent
/// of how many other streams were drawn before.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

struct CdfPoint {
  double x = 0.0;  // seconds
  double F = 0.0;
  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

/// Continuous piecewise-linear cumulative distribution of a transport time.
///
/// Breakpoints have strictly increasing x, non-decreasing F, F = 0 at the
/// first and F = 1 at the last breakpoint. Evaluation clamps to 0 on the left
/// and to 1 on the right.
class PiecewiseLinearCdf {
public:
  static constexpr std::size_t kMaxBreakpoints = 512;

  /// Validates and stores the breakpoints; inputs denser than
  /// kMaxBreakpoints are thinned by quantile subsampling.
  explicit PiecewiseLinearCdf(std::vector<CdfPoint> points);

  double operator()(double x) const noexcept { return eval(x); }
  double eval(double x) const noexcept;
  /// Smallest x with F(x) >= u, interpolated inside the segment.
  double inverse(double u) const noexcept;

  std::span<const CdfPoint> points() const noexcept { return points_; }
  double lower() const noexcept { return points_.front().x; }
  double upper() const noexcept { return points_.back().x; }
  double mean() const noexcept;

  friend bool operator==(const PiecewiseLinearCdf&, const PiecewiseLinearCdf&) = default;

private:
  std::vector<CdfPoint> points_;
};

/// Rank-interpolated empirical CDF: F = (#obs <= v) / n at each distinct
/// observation v, plus a zero anchor one second below the minimum.
PiecewiseLinearCdf ecdf_from_observations(std::span<const double> observations);

struct UniformTransport {
  double lb = 0.0;
  double ub = 0.0;
  friend bool operator==(const UniformTransport&, const UniformTransport&) = default;
};

/// U(min, max). Needs at least two distinct observations.
UniformTransport uniform_fit(std::span<const double> observations);
PiecewiseLinearCdf to_cdf(const UniformTransport& u);

/// Gaussian kernel density estimate.
struct KdeDensity {
  std::vector<double> observations;
  double bandwidth = 1.0;
  friend bool operator==(const KdeDensity&, const KdeDensity&) = default;
};

/// Silverman's rule-of-thumb bandwidth: 0.9 * min(sd, IQR / 1.34) * n^-1/5,
/// falling back to 1 s when the data have no spread.
double silverman_bandwidth(std::span<const double> observations);
KdeDensity kde_fit(std::span<const double> observations);
/// Picks an observation uniformly, adds kernel noise, redraws non-positive values.
double kde_sample(const KdeDensity& kde, Rng& rng);
double kde_density(const KdeDensity& kde, double x);

using TransportDistribution = std::variant<UniformTransport, KdeDensity, PiecewiseLinearCdf>;

/// One positive integer transport time in seconds.
Seconds sample_transport(const TransportDistribution& dist, Rng& rng);
/// Piecewise-linear CDF view of any distribution kind (KDE uses the ECDF of
/// its observations).
PiecewiseLinearCdf transport_cdf(const TransportDistribution& dist);

/// Sup-norm distance between an empirical sample and a CDF.
double kolmogorov_distance(std::vector<double> sample, const PiecewiseLinearCdf& cdf);

/// CSV `x_seconds,F` with header.
void write_cdf_csv(const PiecewiseLinearCdf& cdf, const std::filesystem::path& path);
PiecewiseLinearCdf read_cdf_csv(const std::filesystem::path& path);

}  // namespace batchlab
