#include "slvfx/leverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace slvfx {

namespace {

void check_knots(const std::vector<double>& knots, const char* name)
{
  if (knots.empty())
    throw std::invalid_argument(std::string("leverage surface: empty ") + name);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]))
      throw std::invalid_argument("non-finite parameter");
    if (i && !(knots[i] > knots[i - 1]))
      throw std::invalid_argument(std::string("leverage surface: ") + name + " must be strictly increasing");
  }
}

// Index i and weight w in [0, 1] such that the value at `x` is
// (1 - w) f[i] + w f[i + 1], with x clamped to the knot range.
std::pair<std::size_t, double> locate(const std::vector<double>& knots, double x)
{
  if (knots.size() == 1 || x <= knots.front())
    return { 0, 0.0 };
  if (x >= knots.back())
    return { knots.size() - 1, 0.0 };
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
  return { i, (x - knots[i]) / (knots[i + 1] - knots[i]) };
}

std::string fmt17(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell)
{
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed number '" + cell + "'");
  }
  while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r'))
    ++used;
  if (used != cell.size())
    throw std::invalid_argument("malformed number '" + cell + "'");
  return v;
}

} // namespace

// --- LeverageSurface -------------------------------------------------------

LeverageSurface::LeverageSurface(std::vector<double> t_knots, std::vector<double> x_knots, MatrixXd values)
  : t_knots_(std::move(t_knots))
  , x_knots_(std::move(x_knots))
  , values_(std::move(values))
{
  check_knots(t_knots_, "t knots");
  check_knots(x_knots_, "x knots");
  if (values_.rows() != Eigen::Index(t_knots_.size()) || values_.cols() != Eigen::Index(x_knots_.size()))
    throw std::invalid_argument("leverage surface: values shape does not match knots");
  if (!values_.allFinite())
    throw std::invalid_argument("non-finite parameter");
  if ((values_.array() < 0.0).any())
    throw std::invalid_argument("leverage surface: negative value");

  sigma_max_ = values_.maxCoeff();
  constant_ = values_.minCoeff() == sigma_max_;
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j + 1 < values_.cols(); ++j)
      lipschitz_b_ = std::max(lipschitz_b_, std::abs(values_(i, j + 1) - values_(i, j)) /
                                              (x_knots_[std::size_t(j) + 1] - x_knots_[std::size_t(j)]));
  for (Eigen::Index i = 0; i + 1 < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
      holder_a_ = std::max(holder_a_, std::abs(values_(i + 1, j) - values_(i, j)) /
                                        (t_knots_[std::size_t(i) + 1] - t_knots_[std::size_t(i)]));
}

LeverageSurface LeverageSurface::constant(double level)
{
  return LeverageSurface({ 0.0 }, { 1.0 }, MatrixXd::Constant(1, 1, level));
}

LeverageSurface::Slice LeverageSurface::slice(double t) const
{
  const auto [i, w] = locate(t_knots_, t);
  VectorXd row = values_.row(Eigen::Index(i)).transpose();
  if (w > 0.0)
    row = (1.0 - w) * row + w * values_.row(Eigen::Index(i) + 1).transpose();
  return Slice(*this, std::move(row));
}

double LeverageSurface::Slice::operator()(double x) const
{
  if (row_.size() == 1)
    return row_(0);
  const auto [j, w] = locate(surface_->x_knots_, x);
  double v = row_(Eigen::Index(j));
  if (w > 0.0)
    v = (1.0 - w) * v + w * row_(Eigen::Index(j) + 1);
  return std::clamp(v, 0.0, surface_->sigma_max_);
}

void write_surface(std::ostream& os, const LeverageSurface& surface)
{
  os << "t\\x";
  for (double x : surface.x_knots())
    os << ',' << fmt17(x);
  os << '\n';
  for (std::size_t i = 0; i < surface.t_knots().size(); ++i) {
    os << fmt17(surface.t_knots()[i]);
    for (Eigen::Index j = 0; j < surface.values().cols(); ++j)
      os << ',' << fmt17(surface.values()(Eigen::Index(i), j));
    os << '\n';
  }
}

LeverageSurface read_surface(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("leverage surface: empty input");
  auto header = split_csv(line);
  if (header.size() < 2)
    throw std::invalid_argument("leverage surface: header needs at least one x knot");
  std::vector<double> xs;
  for (std::size_t j = 1; j < header.size(); ++j)
    xs.push_back(parse_number(header[j]));

  std::vector<double> ts;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r")
      continue;
    auto cells = split_csv(line);
    if (cells.size() != xs.size() + 1)
      throw std::invalid_argument("leverage surface: row width does not match header");
    ts.push_back(parse_number(cells[0]));
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j)
      row.push_back(parse_number(cells[j]));
    rows.push_back(std::move(row));
  }
  MatrixXd values(Eigen::Index(rows.size()), Eigen::Index(xs.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j)
      values(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  return LeverageSurface(std::move(ts), std::move(xs), std::move(values));
}

LeverageSurface load_surface(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open leverage surface file " + path);
  return read_surface(in);
}

// --- particle clouds -------------------------------------------------------

void ParticleCloud::check() const
{
  const auto n = spot.size();
  if (n == 0)
    throw std::invalid_argument("particle cloud is empty");
  if (variance.size() != n || discount_d.size() != n || rate_d.size() != n || rate_f.size() != n ||
      (weights.size() != 0 && weights.size() != n))
    throw std::invalid_argument("particle cloud: inconsistent sizes");
  if ((spot.array() <= 0.0).any() || (discount_d.array() <= 0.0).any())
    throw std::invalid_argument("particle cloud: spots and discounts must be positive");
  if (weights.size() && (weights.array() < 0.0).any())
    throw std::invalid_argument("particle cloud: negative weight");
}

ParticleCloud read_cloud(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("particle cloud: empty input");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  const auto header = split_csv(line);
  const bool weighted = header.size() == 6;
  if (header.size() < 5 || header.size() > 6 || header[0] != "S" || header[1] != "v" || header[2] != "D" ||
      header[3] != "rd" || header[4] != "rf" || (weighted && header[5] != "w"))
    throw std::invalid_argument("particle cloud: header must be S,v,D,rd,rf[,w]");

  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r")
      continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("particle cloud: row width does not match header");
    for (std::size_t j = 0; j < cells.size(); ++j)
      cols[j].push_back(parse_number(cells[j]));
  }
  auto to_vec = [](const std::vector<double>& c) { return VectorXd(Eigen::Map<const VectorXd>(c.data(), Eigen::Index(c.size()))); };
  ParticleCloud cloud;
  cloud.spot = to_vec(cols[0]);
  cloud.variance = to_vec(cols[1]);
  cloud.discount_d = to_vec(cols[2]);
  cloud.rate_d = to_vec(cols[3]);
  cloud.rate_f = to_vec(cols[4]);
  if (weighted)
    cloud.weights = to_vec(cols[5]);
  cloud.check();
  return cloud;
}

void write_cloud(std::ostream& os, const ParticleCloud& cloud)
{
  const bool weighted = cloud.weights.size() != 0;
  os << "S,v,D,rd,rf" << (weighted ? ",w" : "") << '\n';
  for (Eigen::Index i = 0; i < cloud.spot.size(); ++i) {
    os << fmt17(cloud.spot(i)) << ',' << fmt17(cloud.variance(i)) << ',' << fmt17(cloud.discount_d(i)) << ','
       << fmt17(cloud.rate_d(i)) << ',' << fmt17(cloud.rate_f(i));
    if (weighted)
      os << ',' << fmt17(cloud.weights(i));
    os << '\n';
  }
}

// --- binning ---------------------------------------------------------------

std::size_t BinningConfig::bin_size(std::size_t n) const
{
  return std::max(min_bin, static_cast<std::size_t>(static_cast<double>(n) * fraction));
}

SpotBinning::SpotBinning(const ParticleCloud& cloud, const BinningConfig& config)
  : cloud_(&cloud)
  , order_(cloud.size())
  , bin_size_(config.bin_size(cloud.size()))
  , min_bin_(config.min_bin)
{
  cloud.check();
  std::iota(order_.begin(), order_.end(), std::size_t(0));
  // Full lexicographic key so that the bins do not depend on particle order.
  auto key = [&cloud](std::size_t i) {
    const auto k = Eigen::Index(i);
    return std::make_tuple(cloud.spot(k), cloud.variance(k), cloud.discount_d(k), cloud.rate_d(k),
                           cloud.rate_f(k), cloud.weight(i));
  };
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
}

std::span<const std::size_t> SpotBinning::bin(double strike) const
{
  const std::size_t n = order_.size();
  if (n < min_bin_ || n < bin_size_)
    throw std::runtime_error("insufficient particles in bin");
  const std::size_t bins = n / bin_size_;
  const auto it = std::lower_bound(order_.begin(), order_.end(), strike,
                                   [this](std::size_t i, double k) { return cloud_->spot(Eigen::Index(i)) < k; });
  const std::size_t pos = static_cast<std::size_t>(it - order_.begin());
  const std::size_t b = std::min(pos / bin_size_, bins - 1);
  const std::size_t begin = b * bin_size_;
  const std::size_t end = b + 1 == bins ? n : begin + bin_size_;
  return { order_.data() + begin, end - begin };
}

double estimate_leverage_det_rates(const ParticleCloud& cloud, double sigma_lv, double strike,
                                   const BinningConfig& config)
{
  const SpotBinning binning(cloud, config);
  const double v = binning.conditional_mean(strike, [&](std::size_t i) { return cloud.variance(Eigen::Index(i)); });
  if (sigma_lv == 0.0)
    return 0.0;
  if (!(v > 0.0))
    throw std::runtime_error("non-positive conditional variance");
  return sigma_lv / std::sqrt(v);
}

double estimate_leverage_full(const ParticleCloud& cloud, double sigma_lv, double strike, double maturity,
                              const MarketTerms& market, const BinningConfig& config)
{
  if (!(market.call_density > 0.0))
    throw std::invalid_argument("non-positive density input");
  if (!(maturity > 0.0) || !(strike > 0.0))
    throw std::invalid_argument("maturity and strike must be positive");

  const SpotBinning binning(cloud, config);
  const double cond_d = binning.conditional_mean(strike, [&](std::size_t i) { return cloud.discount_d(Eigen::Index(i)); });
  const double cond_dv = binning.conditional_mean(strike, [&](std::size_t i) {
    const auto k = Eigen::Index(i);
    return cloud.discount_d(k) * cloud.variance(k);
  });
  if (!(cond_dv > 0.0))
    throw std::runtime_error("non-positive conditional variance");

  // spot order makes the sums independent of how the cloud is stored
  double wsum = 0.0, call_term = 0.0, dom_term = 0.0, for_term = 0.0;
  for (std::size_t i : binning.order()) {
    const auto k = Eigen::Index(i);
    const double w = cloud.weight(i);
    const double d = cloud.discount_d(k);
    const double s = cloud.spot(k);
    const double foreign_excess = cloud.rate_f(k) - market.forward_rate_f;
    const double itm = s >= strike ? 1.0 : 0.0;
    wsum += w;
    call_term += w * d * foreign_excess * std::max(s - strike, 0.0);
    dom_term += w * d * (cloud.rate_d(k) - market.forward_rate_d) * itm;
    for_term += w * d * foreign_excess * itm;
  }
  call_term /= wsum;
  dom_term /= wsum;
  for_term /= wsum;

  const double correction =
    2.0 / (strike * strike * market.call_density) * (call_term - strike * dom_term + strike * for_term);
  return cond_d / cond_dv * (sigma_lv * sigma_lv + correction);
}

} // namespace slvfx
