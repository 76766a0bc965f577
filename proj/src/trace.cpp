#include "mpbcfw/trace.hpp"

#include "json.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mpbcfw {

std::string to_string(PassKind kind) { return kind == PassKind::Exact ? "exact" : "approx"; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t line_no) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad count '" + s + "'");
  return v;
}

std::optional<double> parse_opt(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, line_no);
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.iter << ',' << to_string(r.pass_kind) << ',' << r.exact_calls << ',' << r.approx_calls << ','
        << format_double(r.elapsed_ms) << ',' << format_double(r.dual) << ',' << opt(r.primal) << ','
        << opt(r.gap) << ',' << opt(r.dual_avg) << ',' << opt(r.primal_avg) << ',' << opt(r.gap_avg) << ','
        << format_double(r.mean_ws_size) << ',' << r.approx_passes_this_iter << '\n';
  }
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["iter"] = r.iter;
    j["pass_kind"] = to_string(r.pass_kind);
    j["exact_calls"] = r.exact_calls;
    j["approx_calls"] = r.approx_calls;
    j["elapsed_ms"] = r.elapsed_ms;
    j["dual"] = r.dual;
    auto put = [&](const char* key, const std::optional<double>& v) { j[key] = v ? nlohmann::json(*v) : nlohmann::json(); };
    put("primal", r.primal);
    put("gap", r.gap);
    put("dual_avg", r.dual_avg);
    put("primal_avg", r.primal_avg);
    put("gap_avg", r.gap_avg);
    j["mean_ws_size"] = r.mean_ws_size;
    j["approx_passes_this_iter"] = r.approx_passes_this_iter;
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) throw std::runtime_error("trace line 1: unexpected header");
  std::vector<TraceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 13 fields");
    TraceRecord r;
    r.iter = parse_count(f[0], line_no);
    if (f[1] == "exact")
      r.pass_kind = PassKind::Exact;
    else if (f[1] == "approx")
      r.pass_kind = PassKind::Approx;
    else
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad pass_kind");
    r.exact_calls = parse_count(f[2], line_no);
    r.approx_calls = parse_count(f[3], line_no);
    r.elapsed_ms = parse_double(f[4], line_no);
    r.dual = parse_double(f[5], line_no);
    r.primal = parse_opt(f[6], line_no);
    r.gap = parse_opt(f[7], line_no);
    r.dual_avg = parse_opt(f[8], line_no);
    r.primal_avg = parse_opt(f[9], line_no);
    r.gap_avg = parse_opt(f[10], line_no);
    r.mean_ws_size = parse_double(f[11], line_no);
    r.approx_passes_this_iter = parse_count(f[12], line_no);
    records.push_back(r);
  }
  return records;
}

}  // namespace mpbcfw
