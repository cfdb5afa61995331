#include "batchlab/dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "batchlab/csv.hpp"
#include "batchlab/errors.hpp"

namespace batchlab {

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return Rng(seq);
}

namespace {

std::vector<CdfPoint> thin(std::vector<CdfPoint> points) {
  const std::size_t max = PiecewiseLinearCdf::kMaxBreakpoints;
  if (points.size() <= max) return points;
  std::vector<CdfPoint> out;
  out.reserve(max);
  out.push_back(points.front());
  std::size_t cursor = 1;
  for (std::size_t k = 1; k + 1 < max; ++k) {
    const double target = static_cast<double>(k) / static_cast<double>(max - 1);
    while (cursor + 1 < points.size() && points[cursor].F < target) ++cursor;
    if (cursor + 1 >= points.size()) break;
    if (points[cursor].x > out.back().x) out.push_back(points[cursor]);
    ++cursor;
  }
  out.push_back(points.back());
  return out;
}

}  // namespace

PiecewiseLinearCdf::PiecewiseLinearCdf(std::vector<CdfPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw EstimationError("CDF needs at least two breakpoints");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.F) || p.F < 0.0 || p.F > 1.0)
      throw EstimationError("CDF breakpoint out of range");
    if (i > 0 && (p.x <= points_[i - 1].x || p.F < points_[i - 1].F))
      throw EstimationError("CDF breakpoints must have increasing x and non-decreasing F");
  }
  if (points_.front().F != 0.0 || points_.back().F != 1.0)
    throw EstimationError("CDF must start at F=0 and end at F=1");
  points_ = thin(std::move(points_));
}

double PiecewiseLinearCdf::eval(double x) const noexcept {
  if (x <= points_.front().x) return 0.0;
  if (x >= points_.back().x) return 1.0;
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const CdfPoint& p) { return v < p.x; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (x - lo.x) / (hi.x - lo.x);
  return lo.F + w * (hi.F - lo.F);
}

double PiecewiseLinearCdf::inverse(double u) const noexcept {
  if (u <= 0.0) return points_.front().x;
  if (u >= 1.0) return points_.back().x;
  auto it = std::lower_bound(points_.begin(), points_.end(), u,
                             [](const CdfPoint& p, double v) { return p.F < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (u - lo.F) / (hi.F - lo.F);
  return lo.x + w * (hi.x - lo.x);
}

double PiecewiseLinearCdf::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double mass = points_[i].F - points_[i - 1].F;
    m += mass * 0.5 * (points_[i].x + points_[i - 1].x);
  }
  return m;
}

PiecewiseLinearCdf ecdf_from_observations(std::span<const double> observations) {
  if (observations.empty()) throw EstimationError("cannot build an ECDF from zero observations");
  std::vector<double> sorted(observations.begin(), observations.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CdfPoint> pts;
  pts.push_back({sorted.front() - 1.0, 0.0});
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    pts.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  pts.back().F = 1.0;
  return PiecewiseLinearCdf(std::move(pts));
}

UniformTransport uniform_fit(std::span<const double> observations) {
  if (observations.empty()) throw EstimationError("uniform fit needs observations");
  auto [lo, hi] = std::minmax_element(observations.begin(), observations.end());
  if (!(*lo < *hi)) throw EstimationError("uniform fit needs at least two distinct observations");
  if (*lo <= 0.0) throw EstimationError("uniform fit needs positive transport times");
  return {*lo, *hi};
}

PiecewiseLinearCdf to_cdf(const UniformTransport& u) {
  return PiecewiseLinearCdf({{u.lb, 0.0}, {u.ub, 1.0}});
}

double silverman_bandwidth(std::span<const double> observations) {
  const std::size_t n = observations.size();
  if (n < 2) return 1.0;
  const double mean = std::accumulate(observations.begin(), observations.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : observations) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(observations.begin(), observations.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < n ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  return h > 0.0 ? h : 1.0;
}

KdeDensity kde_fit(std::span<const double> observations) {
  if (observations.empty()) throw EstimationError("KDE fit needs observations");
  return {std::vector<double>(observations.begin(), observations.end()),
          silverman_bandwidth(observations)};
}

double kde_sample(const KdeDensity& kde, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kde.observations.size() - 1);
  std::normal_distribution<double> noise(0.0, kde.bandwidth);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = kde.observations[pick(rng)] + noise(rng);
    if (v > 0.0) return v;
  }
  // Only reachable when nearly all mass sits below zero.
  return *std::max_element(kde.observations.begin(), kde.observations.end());
}

double kde_density(const KdeDensity& kde, double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  double sum = 0.0;
  for (double o : kde.observations) {
    const double z = (x - o) / kde.bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * inv_sqrt_2pi / (kde.bandwidth * static_cast<double>(kde.observations.size()));
}

Seconds sample_transport(const TransportDistribution& dist, Rng& rng) {
  double value = std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformTransport>) {
          return std::uniform_real_distribution<double>(d.lb, d.ub)(rng);
        } else if constexpr (std::is_same_v<T, KdeDensity>) {
          return kde_sample(d, rng);
        } else {
          return d.inverse(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        }
      },
      dist);
  return std::max<Seconds>(1, std::llround(value));
}

PiecewiseLinearCdf transport_cdf(const TransportDistribution& dist) {
  return std::visit(
      [](const auto& d) -> PiecewiseLinearCdf {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformTransport>) {
          return to_cdf(d);
        } else if constexpr (std::is_same_v<T, KdeDensity>) {
          return ecdf_from_observations(d.observations);
        } else {
          return d;
        }
      },
      dist);
}

double kolmogorov_distance(std::vector<double> sample, const PiecewiseLinearCdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf.eval(sample[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                      std::abs(f - static_cast<double>(i) / n)});
  }
  return worst;
}

void write_cdf_csv(const PiecewiseLinearCdf& cdf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x_seconds,F\n";
  for (const auto& p : cdf.points()) out << csv::format_double(p.x) << ',' << csv::format_double(p.F) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

PiecewiseLinearCdf read_cdf_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  csv::require_header(table, {"x_seconds", "F"}, path);
  std::vector<CdfPoint> pts;
  pts.reserve(table.rows.size());
  for (const auto& row : table.rows)
    pts.push_back({csv::to_double(row[0], path), csv::to_double(row[1], path)});
  return PiecewiseLinearCdf(std::move(pts));
}

}  // namespace batchlab
