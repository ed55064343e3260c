#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "gainlab/delaylab.hpp"
#include "gainlab/gains.hpp"
#include "gainlab/matcore.hpp"
#include "gainlab/sim.hpp"

namespace gainlab::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

using ParsedSystem = std::variant<StateSpaceSystem, DelayPredictorSystem>;

struct SystemFile {
  ParsedSystem system;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

/// Row-major nested arrays; a flat array is read as a column vector.
Matrix parse_matrix(const nlohmann::json& value, std::string_view name);

/// A document with "tau", "G" or "K" is a delay system, otherwise a
/// state-space system. Hurwitz failures surface as NotHurwitzError.
SystemFile parse_system_text(std::string_view text);
SystemFile parse_system_file(const std::string& path);

/// {"certificates": [[M, sigma], ...], "b": [[t, b], ...], "T_grid": [...]}
/// with optional "A" (and "family_size") to append certificate_family(A).
Theorem41Input parse_theorem41_text(std::string_view text);
Theorem41Input parse_theorem41_file(const std::string& path);

/// "%.17g"; non-finite values are written as null.
std::string format_number(double v);

/// Serializes with 2-space indentation and 17-significant-digit floats.
std::string dump(const Json& doc);

Json to_json(const Matrix& M);
Json to_json(const StabilityCertificate& cert);
Json to_json(const GainEstimate& est);
Json to_json(const GainReport& report, const GainReportOptions& options);
Json to_json(const VerificationRecord& rec);
Json to_json(const Theorem41Result& result);
Json to_json(const DelayBoundReport& report);
Json to_json(const DelayEmpiricalRecord& rec);

/// Wraps a payload as {"schema_version": ..., "kind": kind, ...payload}.
Json document(std::string_view kind, const Json& payload);

std::string v_curve_csv(const VCurve& curve);
std::string sweep_csv(const std::vector<double>& omegas,
                      const std::vector<double>& values);
/// Columns t, x_1..x_n, y_1..y_p.
std::string trajectory_csv(const Trajectory& traj);
/// Columns t, y_1..y_n, z_1..z_m, xi_1..xi_m, xi_cf_1..xi_cf_m.
std::string delay_trajectory_csv(const DelayTrajectory& traj, const XiSeries& xi);

}  // namespace gainlab::io
