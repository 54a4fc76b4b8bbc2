#include "slvfx/config.hpp"

#include "slvfx/leverage.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace slvfx {

using nlohmann::ordered_json;

namespace {

// "a.b.c": v  ->  {"a": {"b": {"c": v}}}, merged with any nested keys.
ordered_json unflatten(const ordered_json& j)
{
  if (!j.is_object())
    return j;
  ordered_json out = ordered_json::object();
  for (const auto& [key, value] : j.items()) {
    ordered_json* node = &out;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
      node = &(*node)[key.substr(start, dot - start)];
      if (!node->is_object() && !node->is_null())
        throw ValidationError("config: key '" + key + "' conflicts with a scalar");
    }
    ordered_json& leaf = (*node)[key.substr(start)];
    const ordered_json sub = unflatten(value);
    if (leaf.is_object() && sub.is_object())
      leaf.update(sub, true);
    else if (!leaf.is_null())
      throw ValidationError("config: duplicate key '" + key + "'");
    else
      leaf = sub;
  }
  return out;
}

CirParams parse_cir(const ordered_json& j)
{
  CirParams c;
  c.y0 = j.at("y0").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.theta = j.at("theta").get<double>();
  c.xi = j.at("xi").get<double>();
  return c;
}

ordered_json dump_cir(const CirParams& c)
{
  ordered_json j;
  j["y0"] = c.y0;
  j["kappa"] = c.kappa;
  j["theta"] = c.theta;
  j["xi"] = c.xi;
  return j;
}

ShiftFunction parse_shift(const ordered_json* j)
{
  if (!j)
    return {};
  if (j->is_number())
    return ShiftFunction::constant(j->get<double>());
  return ShiftFunction(j->at("knots").get<std::vector<double>>(), j->at("values").get<std::vector<double>>(),
                       j->value("h_max", -1.0));
}

ordered_json dump_shift(const ShiftFunction& h)
{
  ordered_json j;
  j["knots"] = h.knots();
  j["values"] = h.values();
  j["h_max"] = h.h_max();
  return j;
}

CorrelationMatrix parse_corr(const ordered_json* j)
{
  if (!j)
    return {};
  if (j->contains("matrix")) {
    const auto rows = j->at("matrix").get<std::vector<std::vector<double>>>();
    if (rows.size() != 4)
      throw ValidationError("correlation matrix must be 4x4");
    Matrix4d m;
    for (int i = 0; i < 4; ++i) {
      if (rows[std::size_t(i)].size() != 4)
        throw ValidationError("correlation matrix must be 4x4");
      for (int k = 0; k < 4; ++k)
        m(i, k) = rows[std::size_t(i)][std::size_t(k)];
    }
    return CorrelationMatrix(m);
  }
  return CorrelationMatrix::from_pairs(j->value("sv", 0.0), j->value("sd", 0.0), j->value("sf", 0.0),
                                       j->value("vd", 0.0), j->value("vf", 0.0), j->value("df", 0.0));
}

ordered_json dump_corr(const CorrelationMatrix& c)
{
  ordered_json j;
  j["sv"] = c(kSpot, kVariance);
  j["sd"] = c(kSpot, kDomestic);
  j["sf"] = c(kSpot, kForeign);
  j["vd"] = c(kVariance, kDomestic);
  j["vf"] = c(kVariance, kForeign);
  j["df"] = c(kDomestic, kForeign);
  return j;
}

std::vector<double> dates(const ordered_json& j, const char* key)
{
  return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::vector<double>{};
}

BarrierKind parse_kind(const std::string& s)
{
  if (s == "up_out")
    return BarrierKind::UpOut;
  if (s == "up_in")
    return BarrierKind::UpIn;
  if (s == "down_out")
    return BarrierKind::DownOut;
  if (s == "down_in")
    return BarrierKind::DownIn;
  throw ValidationError("unknown barrier kind '" + s + "'");
}

const char* kind_name(BarrierKind k)
{
  switch (k) {
    case BarrierKind::UpOut:
      return "up_out";
    case BarrierKind::UpIn:
      return "up_in";
    case BarrierKind::DownOut:
      return "down_out";
    case BarrierKind::DownIn:
      return "down_in";
  }
  return "";
}

PayoffSpec parse_payoff(const ordered_json& j, double s0)
{
  const std::string type = j.at("type").get<std::string>();
  if (type == "european_call")
    return EuropeanCall{ j.at("strike").get<double>() };
  if (type == "european_put")
    return EuropeanPut{ j.at("strike").get<double>() };
  if (type == "asian_fixed")
    return AsianFixed{ j.at("strike").get<double>(), j.value("psi", 1), dates(j, "fixing_dates"),
                       j.value("continuous", false) };
  if (type == "barrier") {
    const std::string option = j.value("option", std::string("call"));
    if (option != "call" && option != "put")
      throw ValidationError("unknown option type '" + option + "'");
    return Barrier{ parse_kind(j.at("kind").get<std::string>()),
                    option == "call" ? OptionType::Call : OptionType::Put, j.at("strike").get<double>(),
                    j.at("barrier").get<double>(), dates(j, "monitoring_dates") };
  }
  if (type == "double_knock_out_call")
    return DoubleKnockOutCall{ j.at("strike").get<double>(), j.at("lower").get<double>(),
                               j.at("upper").get<double>(), dates(j, "monitoring_dates") };
  if (type == "abdc") {
    if (j.contains("months"))
      return AbdcContract::monthly(j.value("nominal", 1.0), s0, j.at("strike_frac").get<double>(),
                                   j.at("up_out_frac").get<double>(), j.at("down_in_frac").get<double>(),
                                   j.at("coupon").get<double>(), j.at("early_coupon").get<double>(),
                                   j.at("months").get<int>(), j.value("months_per_coupon", 3));
    AbdcContract c;
    c.nominal = j.value("nominal", 1.0);
    c.strike = j.at("strike").get<double>();
    c.barrier_up_out = j.at("barrier_up_out").get<double>();
    c.barrier_down_in = j.at("barrier_down_in").get<double>();
    c.coupon = j.at("coupon").get<double>();
    c.early_coupon = j.at("early_coupon").get<double>();
    c.fixing_dates = dates(j, "fixing_dates");
    c.coupon_dates = dates(j, "coupon_dates");
    c.expiry = j.at("expiry").get<double>();
    return c;
  }
  throw ValidationError("unknown payoff type '" + type + "'");
}

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ordered_json dump_payoff(const PayoffSpec& spec)
{
  ordered_json j;
  j["type"] = payoff_name(spec);
  std::visit(overloaded{
               [&](const EuropeanCall& c) { j["strike"] = c.strike; },
               [&](const EuropeanPut& p) { j["strike"] = p.strike; },
               [&](const AsianFixed& a) {
                 j["strike"] = a.strike;
                 j["psi"] = a.psi;
                 j["fixing_dates"] = a.fixing_dates;
                 j["continuous"] = a.continuous;
               },
               [&](const Barrier& b) {
                 j["kind"] = kind_name(b.kind);
                 j["option"] = b.option == OptionType::Call ? "call" : "put";
                 j["strike"] = b.strike;
                 j["barrier"] = b.barrier;
                 j["monitoring_dates"] = b.monitoring_dates;
               },
               [&](const DoubleKnockOutCall& d) {
                 j["strike"] = d.strike;
                 j["lower"] = d.lower;
                 j["upper"] = d.upper;
                 j["monitoring_dates"] = d.monitoring_dates;
               },
               [&](const AbdcContract& c) {
                 j["nominal"] = c.nominal;
                 j["strike"] = c.strike;
                 j["barrier_up_out"] = c.barrier_up_out;
                 j["barrier_down_in"] = c.barrier_down_in;
                 j["coupon"] = c.coupon;
                 j["early_coupon"] = c.early_coupon;
                 j["fixing_dates"] = c.fixing_dates;
                 j["coupon_dates"] = c.coupon_dates;
                 j["expiry"] = c.expiry;
               },
             },
             spec);
  return j;
}

const char* process_name(ProbeProcess p)
{
  switch (p) {
    case ProbeProcess::Domestic:
      return "domestic";
    case ProbeProcess::Foreign:
      return "foreign";
    case ProbeProcess::Variance:
      break;
  }
  return "variance";
}

ProbeProcess parse_process(const std::string& s)
{
  if (s == "variance")
    return ProbeProcess::Variance;
  if (s == "domestic")
    return ProbeProcess::Domestic;
  if (s == "foreign")
    return ProbeProcess::Foreign;
  throw ValidationError("unknown process '" + s + "'");
}

const ordered_json* find(const ordered_json& j, const char* key)
{
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

JobConfig parse_tree(const ordered_json& root, const std::string& base_dir)
{
  JobConfig job;
  job.base_dir = base_dir;

  const ordered_json& m = root.at("model");
  job.model.s0 = m.at("s0").get<double>();
  job.model.variance = parse_cir(m.at("variance"));
  job.model.domestic = parse_cir(m.at("domestic"));
  job.model.foreign = parse_cir(m.at("foreign"));
  job.model.shift_d = parse_shift(find(m, "shift_d"));
  job.model.shift_f = parse_shift(find(m, "shift_f"));
  job.model.corr = parse_corr(find(m, "correlation"));
  if (const auto* lev = find(m, "leverage")) {
    if (lev->is_number())
      job.leverage.constant = lev->get<double>();
    else if (lev->contains("file"))
      job.leverage.file = lev->at("file").get<std::string>();
    else
      job.leverage.constant = lev->value("constant", 1.0);
  }

  const ordered_json& g = root.at("grid");
  job.maturity = g.at("maturity").get<double>();
  job.steps_per_year = g.at("steps_per_year").get<int>();

  if (const auto* p = find(root, "payoff"))
    job.payoffs.push_back(parse_payoff(*p, job.model.s0));
  if (const auto* ps = find(root, "payoffs"))
    for (const auto& p : *ps)
      job.payoffs.push_back(parse_payoff(p, job.model.s0));

  job.n_paths = root.value("n_paths", job.n_paths);
  job.seed = root.value("seed", job.seed);
  job.batch_size = root.value("batch_size", job.batch_size);

  if (const auto* c = find(root, "converge"))
    job.converge_steps = c->value("steps", std::vector<int>{});
  if (const auto* mp = find(root, "moment_probe")) {
    const std::string kind = mp->value("kind", std::string("sup_power"));
    if (kind == "sup_power")
      job.moment.kind = MomentSelector::Kind::SupPower;
    else if (kind == "exp_integral")
      job.moment.kind = MomentSelector::Kind::ExpIntegral;
    else
      throw ValidationError("unknown moment kind '" + kind + "'");
    job.moment.process = parse_process(mp->value("process", std::string("variance")));
    job.moment.p = mp->value("p", 1.0);
    job.moment.lambda = mp->value("lambda", 0.0);
    job.moment_steps = mp->value("steps", std::vector<int>{});
  }
  if (const auto* o = find(root, "output")) {
    if (o->contains("path"))
      job.out = o->at("path").get<std::string>();
    if (o->contains("dump_paths"))
      job.dump_paths = o->at("dump_paths").get<std::string>();
  }
  return job;
}

} // namespace

JobConfig parse_config(const std::string& text, const std::string& base_dir)
{
  try {
    return parse_tree(unflatten(ordered_json::parse(text)), base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

JobConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string dump_config(const JobConfig& job)
{
  ordered_json root;
  ordered_json& m = root["model"];
  m["s0"] = job.model.s0;
  m["variance"] = dump_cir(job.model.variance);
  m["domestic"] = dump_cir(job.model.domestic);
  m["foreign"] = dump_cir(job.model.foreign);
  m["shift_d"] = dump_shift(job.model.shift_d);
  m["shift_f"] = dump_shift(job.model.shift_f);
  m["correlation"] = dump_corr(job.model.corr);
  if (job.leverage.file)
    m["leverage"] = { { "file", *job.leverage.file } };
  else
    m["leverage"] = { { "constant", job.leverage.constant } };

  root["grid"] = { { "maturity", job.maturity }, { "steps_per_year", job.steps_per_year } };
  root["payoffs"] = ordered_json::array();
  for (const auto& p : job.payoffs)
    root["payoffs"].push_back(dump_payoff(p));
  root["n_paths"] = job.n_paths;
  root["seed"] = job.seed;
  root["batch_size"] = job.batch_size;
  root["converge"] = { { "steps", job.converge_steps } };

  ordered_json mp;
  mp["kind"] = job.moment.kind == MomentSelector::Kind::SupPower ? "sup_power" : "exp_integral";
  mp["process"] = process_name(job.moment.process);
  mp["p"] = job.moment.p;
  mp["lambda"] = job.moment.lambda;
  mp["steps"] = job.moment_steps;
  root["moment_probe"] = mp;

  ordered_json out = ordered_json::object();
  if (job.out)
    out["path"] = *job.out;
  if (job.dump_paths)
    out["dump_paths"] = *job.dump_paths;
  root["output"] = out;
  return root.dump(2) + "\n";
}

std::optional<std::string> leverage_path(const JobConfig& job)
{
  if (!job.leverage.file)
    return std::nullopt;
  std::filesystem::path p(*job.leverage.file);
  if (p.is_relative() && !job.base_dir.empty())
    p = std::filesystem::path(job.base_dir) / p;
  return p.string();
}

void load_leverage(JobConfig& job)
{
  if (const auto path = leverage_path(job)) {
    if (!std::filesystem::exists(*path))
      throw ValidationError("leverage surface file not found: " + *path);
    try {
      job.model.leverage = std::make_shared<LeverageSurface>(load_surface(*path));
    } catch (const std::exception& e) {
      throw ValidationError("leverage surface " + *path + ": " + e.what());
    }
  } else {
    job.model.leverage = std::make_shared<LeverageSurface>(LeverageSurface::constant(job.leverage.constant));
  }
}

std::vector<std::string> check_job(const JobConfig& job)
{
  ValidationReport report;
  try {
    report = validate(job.model);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  std::vector<std::string> errors = report.errors;
  try {
    const SimGrid grid(job.maturity, job.steps_per_year);
    for (const auto& p : job.payoffs)
      check_dates(p, grid);
  } catch (const std::invalid_argument& e) {
    errors.emplace_back(e.what());
  }
  if (job.n_paths < 2)
    errors.emplace_back("n_paths too small");
  if (job.batch_size <= 0)
    errors.emplace_back("batch_size must be positive");
  if (!errors.empty()) {
    std::string msg = errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i)
      msg += "; " + errors[i];
    throw ValidationError(msg);
  }
  std::vector<std::string> warnings = report.warnings;
  for (const auto& p : job.payoffs)
    if (const auto* c = std::get_if<AbdcContract>(&p))
      for (auto& w : c->warnings(job.model.s0))
        warnings.push_back(std::move(w));
  return warnings;
}

std::optional<std::uint64_t> seed_from_env()
{
  const char* s = std::getenv("SEED");
  if (!s || !*s)
    return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno || *end || *s == '-')
    throw ValidationError(std::string("SEED is not an unsigned integer: ") + s);
  return v;
}

} // namespace slvfx
