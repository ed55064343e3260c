#include "gainlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace gainlab::io {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("top-level JSON value must be an object");
  return doc;
}

double finite_number(const json& v, std::string_view what) {
  if (!v.is_number()) throw ParseError(std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(std::string(what) + " must be finite");
  return x;
}

const json& required(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(std::string("missing field \"") + key + "\"");
  return *it;
}

void read_options(const json& doc, SystemFile& out) {
  if (auto it = doc.find("tol"); it != doc.end()) {
    const double tol = finite_number(*it, "tol");
    if (!(tol > 0.0)) throw ParseError("tol must be positive");
    out.tol = tol;
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) {
      throw ParseError("seed must be a non-negative integer");
    }
    out.seed = it->get<std::uint64_t>();
  }
}

bool is_scalar(const Json& v) { return !v.is_array() && !v.is_object(); }

void dump_into(const Json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::number_float:
      out += format_number(v.get<double>());
      return;
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : v) flat = flat && is_scalar(e);
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump_into(v[i], 0, out);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += inner;
        dump_into(v[i], indent + 1, out);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++i) {
        out += inner + Json(it.key()).dump() + ": ";
        dump_into(it.value(), indent + 1, out);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    default:
      out += v.dump();
  }
}

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

void csv_row(std::ostringstream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << format_number(row[i]);
  }
  os << '\n';
}

}  // namespace

Matrix parse_matrix(const nlohmann::json& value, std::string_view name) {
  const std::string what(name);
  if (value.is_number()) {
    Matrix M(1, 1);
    M(0, 0) = finite_number(value, what);
    return M;
  }
  if (!value.is_array() || value.empty()) {
    throw ParseError(what + " must be a non-empty numeric array");
  }
  if (!value.front().is_array()) {
    Matrix M(static_cast<Eigen::Index>(value.size()), 1);
    for (std::size_t i = 0; i < value.size(); ++i) {
      M(static_cast<Eigen::Index>(i), 0) = finite_number(value[i], what + " entries");
    }
    return M;
  }
  const std::size_t cols = value.front().size();
  if (cols == 0) throw ParseError(what + " has an empty row");
  Matrix M(static_cast<Eigen::Index>(value.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const json& row = value[i];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(what + " is ragged (row " + std::to_string(i) + ")");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          finite_number(row[j], what + " entries");
    }
  }
  return M;
}

SystemFile parse_system_text(std::string_view text) {
  const json doc = parse_document(text);
  const bool delay = doc.contains("tau") || doc.contains("G") || doc.contains("K") ||
                     doc.contains("mu");
  try {
    if (delay) {
      const double tau = finite_number(required(doc, "tau"), "tau");
      const double mu = finite_number(required(doc, "mu"), "mu");
      if (!(tau > 0.0)) throw ParseError("tau must be positive");
      if (!(mu > 0.0)) throw ParseError("mu must be positive");
      SystemFile out{DelayPredictorSystem(parse_matrix(required(doc, "A"), "A"),
                                          parse_matrix(required(doc, "B"), "B"),
                                          parse_matrix(required(doc, "G"), "G"),
                                          parse_matrix(required(doc, "K"), "K"),
                                          tau, mu),
                     std::nullopt, std::nullopt};
      read_options(doc, out);
      return out;
    }
    SystemFile out{StateSpaceSystem(parse_matrix(required(doc, "A"), "A"),
                                    parse_matrix(required(doc, "B"), "B"),
                                    parse_matrix(required(doc, "C"), "C")),
                   std::nullopt, std::nullopt};
    read_options(doc, out);
    return out;
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

SystemFile parse_system_file(const std::string& path) {
  return parse_system_text(read_file(path));
}

Theorem41Input parse_theorem41_text(std::string_view text) {
  const json doc = parse_document(text);
  Theorem41Input in;
  const json& certs = required(doc, "certificates");
  if (!certs.is_array()) throw ParseError("certificates must be an array of [M, sigma]");
  for (const json& c : certs) {
    if (!c.is_array() || c.size() != 2) {
      throw ParseError("each certificate must be a pair [M, sigma]");
    }
    in.certificates.push_back({finite_number(c[0], "M"), finite_number(c[1], "sigma")});
  }
  if (auto it = doc.find("A"); it != doc.end()) {
    int count = 8;
    if (auto f = doc.find("family_size"); f != doc.end()) {
      if (!f->is_number_integer() || f->get<int>() < 1) {
        throw ParseError("family_size must be a positive integer");
      }
      count = f->get<int>();
    }
    const Matrix A = parse_matrix(*it, "A");
    for (const DecayPair& d : certificate_family(A, count)) in.certificates.push_back(d);
  }
  const json& b = required(doc, "b");
  if (!b.is_array()) throw ParseError("b must be an array of [t, b] pairs");
  for (const json& s : b) {
    if (!s.is_array() || s.size() != 2) throw ParseError("each b sample must be [t, b]");
    in.b_times.push_back(finite_number(s[0], "b time"));
    in.b_values.push_back(finite_number(s[1], "b value"));
  }
  const json& grid = required(doc, "T_grid");
  if (!grid.is_array()) throw ParseError("T_grid must be an array");
  for (const json& t : grid) in.T_grid.push_back(finite_number(t, "T_grid entry"));
  return in;
}

Theorem41Input parse_theorem41_file(const std::string& path) {
  return parse_theorem41_text(read_file(path));
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump(const Json& doc) {
  std::string out;
  dump_into(doc, 0, out);
  out += '\n';
  return out;
}

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(vector_json(M.row(i).transpose()));
  return rows;
}

Json to_json(const StabilityCertificate& cert) {
  return Json{{"M", number(cert.M)}, {"sigma", number(cert.sigma)}, {"P", to_json(cert.P)}};
}

Json to_json(const GainEstimate& est) {
  Json j{{"method", est.method},
         {"kind", to_string(est.kind)},
         {"value", number(est.value)},
         {"tolerance", number(est.tolerance)}};
  if (!est.note.empty()) j["note"] = est.note;
  return j;
}

Json to_json(const GainReport& report, const GainReportOptions& options) {
  Json j;
  j["system"] = {{"n", report.n}, {"m", report.m}, {"p", report.p}};
  j["certificate"] = to_json(report.certificate);
  Json flags{{"metzler", report.flags.metzler},
             {"nonnegative_B", report.flags.nonnegative_B},
             {"nonnegative_C", report.flags.nonnegative_C}};
  if (report.flags.assumption_H) {
    flags["assumption_H"] = {{"lambdas", vector_json(report.flags.assumption_H->lambdas)}};
  } else {
    flags["assumption_H"] = nullptr;
  }
  j["structure"] = flags;
  j["positivity"] = to_string(report.positivity);
  j["exact"] = report.exact ? to_json(*report.exact) : Json(nullptr);
  j["lowers"] = Json::array();
  for (const auto& e : report.lowers) j["lowers"].push_back(to_json(e));
  j["uppers"] = Json::array();
  for (const auto& e : report.uppers) j["uppers"].push_back(to_json(e));
  j["periodic_curve"] = Json::array();
  for (const auto& [T, W] : report.periodic_curve) {
    j["periodic_curve"].push_back(Json::array({number(T), number(W)}));
  }
  j["sandwich_ok"] = report.sandwich_ok;
  j["notes"] = report.notes;
  j["options"] = {{"tol", number(options.tol)},
                  {"seed", options.seed},
                  {"omega_min", number(options.omega_min)},
                  {"omega_max", number(options.omega_max)},
                  {"omega_points", options.omega_points},
                  {"refine_omega", options.refine_omega},
                  {"random_bases", options.random_bases},
                  {"positivity_grid", options.positivity_grid}};
  return j;
}

Json to_json(const VerificationRecord& rec) {
  return Json{{"gamma", number(rec.gamma)},
              {"accuracy", number(rec.accuracy)},
              {"T", number(rec.T)},
              {"R", number(rec.R)},
              {"period", number(rec.period)},
              {"V_T", number(rec.V_T)},
              {"sup_gain", number(rec.sup_gain)},
              {"asymptotic_gain", number(rec.asymptotic_gain)},
              {"lower_limit", number(rec.lower_limit)},
              {"upper_limit", number(rec.upper_limit)},
              {"step", number(rec.step)},
              {"t_end", number(rec.t_end)},
              {"passed", rec.passed}};
}

Json to_json(const Theorem41Result& result) {
  auto cells = [](const std::vector<Theorem41Cell>& list) {
    Json a = Json::array();
    for (const auto& c : list) {
      a.push_back({{"M", number(c.certificate.M)},
                   {"sigma", number(c.certificate.sigma)},
                   {"T", number(c.T)},
                   {"value", number(c.value)}});
    }
    return a;
  };
  return Json{{"estimate", to_json(result.estimate)},
              {"sup_b", number(result.sup_b)},
              {"best_cell", result.best_cell ? number(*result.best_cell) : Json(nullptr)},
              {"cells", cells(result.cells)},
              {"skipped", cells(result.skipped)}};
}

Json to_json(const DelayBoundReport& r) {
  return Json{{"M", number(r.M)},
              {"sigma", number(r.sigma)},
              {"G_norm", number(r.G_norm)},
              {"phi_integral", number(r.phi_integral)},
              {"phi_tau", number(r.phi_tau)},
              {"r_integral", number(r.r_integral)},
              {"oag_bound", number(r.oag_bound)},
              {"ios_bound", number(r.ios_bound)},
              {"quad_tol", number(r.quad_tol)}};
}

Json to_json(const DelayEmpiricalRecord& rec) {
  Json entries = Json::array();
  for (const auto& e : rec.entries) {
    entries.push_back({{"sup_gain", number(e.sup_gain)},
                       {"asymptotic_gain", number(e.asymptotic_gain)}});
  }
  return Json{{"oag_bound", number(rec.oag_bound)},
              {"tolerance", number(rec.tolerance)},
              {"t_end", number(rec.t_end)},
              {"window", number(rec.window)},
              {"step", number(rec.step)},
              {"entries", entries},
              {"passed", rec.passed}};
}

Json document(std::string_view kind, const Json& payload) {
  Json doc{{"schema_version", kSchemaVersion}, {"kind", std::string(kind)}};
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  return doc;
}

std::string v_curve_csv(const VCurve& curve) {
  std::ostringstream os;
  os << "T,V\n";
  for (std::size_t i = 0; i < curve.horizons.size(); ++i) {
    csv_row(os, {curve.horizons[i], curve.values[i]});
  }
  return os.str();
}

std::string sweep_csv(const std::vector<double>& omegas,
                      const std::vector<double>& values) {
  std::ostringstream os;
  os << "omega,psi\n";
  for (std::size_t i = 0; i < omegas.size(); ++i) csv_row(os, {omegas[i], values[i]});
  return os.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << 't';
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i) os << ",x_" << i + 1;
  for (Eigen::Index i = 0; i < traj.outputs.rows(); ++i) os << ",y_" << i + 1;
  os << '\n';
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    row.assign(1, traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) row.push_back(traj.states(i, c));
    for (Eigen::Index i = 0; i < traj.outputs.rows(); ++i) row.push_back(traj.outputs(i, c));
    csv_row(os, row);
  }
  return os.str();
}

std::string delay_trajectory_csv(const DelayTrajectory& traj, const XiSeries& xi) {
  const Eigen::Index n = traj.y.rows();
  const Eigen::Index m = traj.z.rows();
  std::ostringstream os;
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",y_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",z_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",xi_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",xi_cf_" << i + 1;
  os << '\n';
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    row.assign(1, traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(traj.y(i, c));
    const Vector z = traj.z_at(c);
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(z(i));
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(xi.numeric(i, c));
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(xi.closed_form(i, c));
    csv_row(os, row);
  }
  return os.str();
}

}  // namespace gainlab::io
