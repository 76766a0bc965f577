#ifndef MPBCFW_TRACE_HPP
#define MPBCFW_TRACE_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpbcfw {

enum class PassKind { Exact, Approx };

/// One logged measurement, emitted after every pass.
struct TraceRecord {
  std::size_t iter = 0;
  PassKind pass_kind = PassKind::Exact;
  std::size_t exact_calls = 0;  // cumulative, training calls only
  std::size_t approx_calls = 0;
  double elapsed_ms = 0.0;
  double dual = 0.0;
  std::optional<double> primal;
  std::optional<double> gap;
  std::optional<double> dual_avg;
  std::optional<double> primal_avg;
  std::optional<double> gap_avg;
  double mean_ws_size = 0.0;
  std::size_t approx_passes_this_iter = 0;
};

inline constexpr const char* kTraceCsvHeader =
    "iter,pass_kind,exact_calls,approx_calls,elapsed_ms,dual,primal,gap,dual_avg,primal_avg,gap_avg,mean_ws_size,"
    "approx_passes_this_iter";

std::string to_string(PassKind kind);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& records);

/// Parses a CSV trace, validating the header and every field. Throws
/// std::runtime_error with the offending line number.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

}  // namespace mpbcfw

#endif  // MPBCFW_TRACE_HPP
