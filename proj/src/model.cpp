#include "slvfx/model.hpp"

#include "slvfx/cholesky.hpp"
#include "slvfx/leverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace slvfx {

double CirParams::feller_ratio() const
{
  if (xi == 0.0)
    return std::numeric_limits<double>::infinity();
  return 2.0 * kappa * theta / (xi * xi);
}

// --- ShiftFunction ---------------------------------------------------------

ShiftFunction::ShiftFunction()
  : knots_{ 0.0 }
  , values_{ 0.0 }
  , h_max_(0.0)
{
}

ShiftFunction::ShiftFunction(std::vector<double> knots, std::vector<double> values, double h_max)
  : knots_(std::move(knots))
  , values_(std::move(values))
  , h_max_(h_max)
{
  if (knots_.empty() || knots_.size() != values_.size())
    throw std::invalid_argument("shift function: knots and values must be non-empty and equal in length");
  if (knots_.front() != 0.0)
    throw std::invalid_argument("shift function: first knot must be 0");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1]))
      throw std::invalid_argument("shift function: knots must be strictly increasing");
  double largest = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite parameter");
    largest = std::max(largest, std::abs(v));
  }
  if (h_max_ < 0.0)
    h_max_ = largest;
  else if (largest > h_max_)
    throw std::invalid_argument("shift function: |value| exceeds h_max");
}

ShiftFunction ShiftFunction::constant(double level)
{
  return ShiftFunction({ 0.0 }, { level });
}

double ShiftFunction::operator()(double t) const
{
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin())
    return values_.front();
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double ShiftFunction::integral(double a, double b) const
{
  if (b <= a)
    return 0.0;
  if (knots_.size() == 1)
    return values_.front() * (b - a);
  double total = 0.0;
  double lo = a;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
  std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  while (lo < b) {
    const double hi = i + 1 < knots_.size() ? std::min(b, knots_[i + 1]) : b;
    total += values_[i] * (hi - lo);
    lo = hi;
    ++i;
  }
  return total;
}

bool ShiftFunction::is_zero() const
{
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

// --- CorrelationMatrix -----------------------------------------------------

CorrelationMatrix::CorrelationMatrix()
  : entries_(Matrix4d::Identity())
{
}

CorrelationMatrix::CorrelationMatrix(const Matrix4d& entries)
  : entries_(entries)
{
  if (!entries_.allFinite())
    throw std::invalid_argument("non-finite parameter");
  for (int i = 0; i < kFactors; ++i) {
    if (entries_(i, i) != 1.0)
      throw std::invalid_argument("correlation matrix: diagonal must be exactly 1");
    for (int j = 0; j < kFactors; ++j) {
      if (entries_(i, j) != entries_(j, i))
        throw std::invalid_argument("correlation matrix: not symmetric");
      if (entries_(i, j) < -1.0 || entries_(i, j) > 1.0)
        throw std::invalid_argument("correlation matrix: entry outside [-1, 1]");
    }
  }
}

CorrelationMatrix CorrelationMatrix::from_pairs(double sv, double sd, double sf, double vd, double vf, double df)
{
  Matrix4d m;
  // clang-format off
  m << 1.0, sv,  sd,  sf,
       sv,  1.0, vd,  vf,
       sd,  vd,  1.0, df,
       sf,  vf,  df,  1.0;
  // clang-format on
  return CorrelationMatrix(m);
}

// --- validation ------------------------------------------------------------

namespace {

bool finite(const CirParams& c)
{
  return std::isfinite(c.y0) && std::isfinite(c.kappa) && std::isfinite(c.theta) && std::isfinite(c.xi);
}

void check_positive(const CirParams& c, const std::string& name, std::vector<std::string>& errors)
{
  const std::pair<const char*, double> fields[] = {
    { "y0", c.y0 }, { "kappa", c.kappa }, { "theta", c.theta }, { "xi", c.xi }
  };
  for (const auto& [field, value] : fields)
    if (!(value > 0.0))
      errors.push_back(name + "." + field + " must be positive");
}

std::string json_escape(const std::string& s)
{
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\')
      out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

std::string format_double(double v)
{
  if (std::isinf(v))
    return "\"inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string ValidationReport::to_json() const
{
  std::ostringstream os;
  os << "{\"corr_psd\":" << (corr_psd ? "true" : "false") << ",\"feller\":[";
  for (std::size_t i = 0; i < feller.size(); ++i) {
    if (i)
      os << ',';
    os << "{\"factor\":\"" << feller[i].factor << "\",\"ratio\":" << format_double(feller[i].ratio)
       << ",\"satisfied\":" << (feller[i].satisfied ? "true" : "false") << '}';
  }
  auto list = [&os](const char* key, const std::vector<std::string>& items) {
    os << ",\"" << key << "\":[";
    for (std::size_t i = 0; i < items.size(); ++i)
      os << (i ? "," : "") << '"' << json_escape(items[i]) << '"';
    os << ']';
  };
  list("errors", errors);
  list("warnings", warnings);
  os << '}';
  return os.str();
}

ValidationReport validate(const ModelParams& params)
{
  if (!std::isfinite(params.s0) || !finite(params.variance) || !finite(params.domestic) ||
      !finite(params.foreign) || !params.corr.matrix().allFinite())
    throw std::invalid_argument("non-finite parameter");

  ValidationReport report;
  if (!(params.s0 > 0.0))
    report.errors.push_back("s0 must be positive");
  check_positive(params.variance, "variance", report.errors);
  check_positive(params.domestic, "domestic", report.errors);
  check_positive(params.foreign, "foreign", report.errors);

  try {
    cholesky_lower(params.corr.matrix());
    report.corr_psd = true;
  } catch (const std::domain_error&) {
    report.corr_psd = false;
    report.errors.push_back("matrix not PSD");
  }

  const std::pair<const char*, const CirParams*> factors[] = {
    { "variance", &params.variance }, { "domestic", &params.domestic }, { "foreign", &params.foreign }
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = *factors[i].second;
    report.feller[i] = { factors[i].first, c.feller_ratio(), c.feller_satisfied() };
  }
  if (!report.feller[2].satisfied)
    report.warnings.push_back("foreign Feller condition 2 kappa theta > xi^2 violated; convergence results do not apply");
  if (!report.feller[1].satisfied)
    report.warnings.push_back("domestic Feller condition 2 kappa theta > xi^2 violated");

  if (!params.leverage)
    report.errors.push_back("no leverage surface attached");

  return report;
}

double zeta(const ModelParams& params)
{
  if (!params.leverage)
    throw std::invalid_argument("zeta: no leverage surface attached");
  return params.variance.xi * params.leverage->sigma_max();
}

} // namespace slvfx
