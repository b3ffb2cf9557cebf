#include "spectator/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spectator/numerics.hpp"

namespace spectator {

namespace {

// Fritsch-Carlson monotone cubic slopes. Limits the derivatives so the
// interpolant never overshoots the data; nonnegative data stays nonnegative.
Eigen::ArrayXd pchip_slopes(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  const Eigen::Index n = x.size();
  Eigen::ArrayXd d(n);
  if (n == 1) {
    d[0] = 0.0;
    return d;
  }
  Eigen::ArrayXd h(n - 1), delta(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // clamp endpoint slopes (Fritsch-Carlson three-point rule)
  for (Eigen::Index i : {Eigen::Index(0), n - 1}) {
    const Eigen::Index j = (i == 0) ? 0 : n - 2;
    if (delta[j] == 0.0)
      d[i] = 0.0;
    else if (d[i] * delta[j] < 0.0)
      d[i] = 0.0;
    else if (std::abs(d[i]) > 3.0 * std::abs(delta[j]))
      d[i] = 3.0 * delta[j];
  }
  return d;
}

double pchip_eval(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                  const Eigen::ArrayXd& d, double q) {
  const Eigen::Index n = x.size();
  const double* begin = x.data();
  const double* it = std::upper_bound(begin, begin + n, q);
  Eigen::Index i = std::max<Eigen::Index>(1, it - begin) - 1;
  i = std::min(i, n - 2);
  const double h = x[i + 1] - x[i];
  const double t = (q - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
}

}  // namespace

SpectralDensity SpectralDensity::white(double s0) {
  if (s0 < 0.0)
    throw Error("validation:bad_value:S0", "white spectrum needs S0 >= 0");
  SpectralDensity s;
  s.kind_ = SpectrumKind::White;
  s.s0_ = s0;
  return s;
}

SpectralDensity SpectralDensity::lorentzian(double s0, double gamma) {
  if (s0 < 0.0 || gamma <= 0.0)
    throw Error("validation:bad_value:spectrum",
                "lorentzian spectrum needs S0 >= 0 and gamma > 0");
  SpectralDensity s;
  s.kind_ = SpectrumKind::Lorentzian;
  s.s0_ = s0;
  s.gamma_ = gamma;
  return s;
}

SpectralDensity SpectralDensity::tabulated(Eigen::ArrayXd omega,
                                           Eigen::ArrayXd value) {
  if (omega.size() < 2 || omega.size() != value.size())
    throw Error("validation:bad_value:spectrum",
                "tabulated spectrum needs >= 2 (omega, S) samples");
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    if (value[i] < 0.0)
      throw Error("validation:bad_value:spectrum", "S[omega] must be >= 0");
    if (omega[i] < 0.0)
      throw Error("validation:bad_value:spectrum",
                  "tabulated grid must be given on omega >= 0");
    if (i > 0 && omega[i] <= omega[i - 1])
      throw Error("validation:bad_value:spectrum",
                  "tabulated grid must be strictly increasing");
  }
  SpectralDensity s;
  s.kind_ = SpectrumKind::Tabulated;
  s.grid_ = std::move(omega);
  s.values_ = std::move(value);
  s.slopes_ = pchip_slopes(s.grid_, s.values_);
  s.s0_ = s.values_[0];  // flat infrared extension
  return s;
}

SpectralDensity SpectralDensity::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("validation:missing_file", "cannot open spectrum CSV " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> w, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b))
      throw Error("validation:bad_value:spectrum",
                  "malformed spectrum CSV row: " + line);
    w.push_back(a);
    v.push_back(b);
  }
  Eigen::ArrayXd omega = Eigen::Map<Eigen::ArrayXd>(w.data(), w.size());
  Eigen::ArrayXd value = Eigen::Map<Eigen::ArrayXd>(v.data(), v.size());
  return tabulated(std::move(omega), std::move(value));
}

double SpectralDensity::operator()(double omega) const {
  const double w = std::abs(omega);  // evenness
  switch (kind_) {
    case SpectrumKind::White:
      return s0_;
    case SpectrumKind::Lorentzian: {
      const double q2 = 0.25 * gamma_ * gamma_;
      return s0_ * q2 / (w * w + q2);
    }
    case SpectrumKind::Tabulated:
      if (w <= grid_[0]) return values_[0];
      if (w >= grid_[grid_.size() - 1]) return 0.0;
      return std::max(0.0, pchip_eval(grid_, values_, slopes_, w));
  }
  return 0.0;
}

bool SpectralDensity::is_zero() const {
  if (kind_ == SpectrumKind::Tabulated) return (values_ == 0.0).all();
  return s0_ == 0.0;
}

double SpectralDensity::tail_over_omega_sq(double cutoff) const {
  switch (kind_) {
    case SpectrumKind::White:
      return s0_ / cutoff;
    case SpectrumKind::Lorentzian:
      // S <= S0 g^2 / (4 w^2)  =>  tail <= S0 g^2 / (12 W^3)
      return s0_ * gamma_ * gamma_ / (12.0 * cutoff * cutoff * cutoff);
    case SpectrumKind::Tabulated: {
      const double wmax = grid_[grid_.size() - 1];
      if (cutoff >= wmax) return 0.0;
      const double smax = values_.maxCoeff();
      return smax * (1.0 / cutoff - 1.0 / wmax);
    }
  }
  return 0.0;
}

double SpectralDensity::support_max() const {
  if (kind_ == SpectrumKind::Tabulated) return grid_[grid_.size() - 1];
  return std::numeric_limits<double>::infinity();
}

double SpectralDensity::frequency_scale() const {
  switch (kind_) {
    case SpectrumKind::White:
      return 0.0;
    case SpectrumKind::Lorentzian:
      return gamma_;
    case SpectrumKind::Tabulated:
      return grid_[grid_.size() - 1];
  }
  return 0.0;
}

double SpectralDensity::correlation_time() const {
  const double s0 = zero_frequency();
  if (s0 == 0.0) return 0.0;
  switch (kind_) {
    case SpectrumKind::White:
      return 0.0;
    case SpectrumKind::Lorentzian:
      return 2.0 / gamma_;
    case SpectrumKind::Tabulated: {
      // inverse of the half-height frequency
      for (Eigen::Index i = 0; i < grid_.size(); ++i)
        if (values_[i] <= 0.5 * s0 && grid_[i] > 0.0) return 1.0 / grid_[i];
      return 1.0 / grid_[grid_.size() - 1];
    }
  }
  return 0.0;
}

std::string SpectralDensity::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case SpectrumKind::White:
      out << "white(S0=" << s0_ << ")";
      break;
    case SpectrumKind::Lorentzian:
      out << "lorentzian(S0=" << s0_ << ",gamma=" << gamma_ << ")";
      break;
    case SpectrumKind::Tabulated:
      out << "tabulated(" << grid_.size() << " points, omega_max="
          << grid_[grid_.size() - 1] << ")";
      break;
  }
  return out.str();
}

}  // namespace spectator
