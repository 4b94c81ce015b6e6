#pragma once

// Plain-text input for channel-coupled Hamiltonians:
//
//   N K [PV]
//   N lines of N reals     (H_cl rows)
//   N lines of K reals     (W rows)
//   N lines of N reals     (principal-value term, only with the PV marker)
//
// Anything else, including extra non-blank lines, is rejected with the
// offending line number.

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "openqs/model.hpp"

namespace openqs {

struct MatrixFile {
  RealMatrix h_cl;
  ChannelCoupling coupling;
  std::optional<RealMatrix> pv_term;

  EffectiveHamiltonian hamiltonian() const { return build_channel_coupled(h_cl, coupling, pv_term); }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw InputError("malformed number '" + std::string(tok) + "'", line);
  if (!std::isfinite(v)) throw InputError("non-finite number '" + std::string(tok) + "'", line);
  return v;
}

inline std::size_t parse_count(std::string_view tok, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0)
    throw InputError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line);
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next line; throws at end of input.
  std::string next(const char* expecting) {
    std::string s;
    if (!std::getline(in_, s)) throw InputError(std::string("unexpected end of input, expected ") + expecting, line_ + 1);
    ++line_;
    return s;
  }

  std::size_t line() const { return line_; }

  void expect_end() {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      if (!split_ws(s).empty()) throw InputError("unexpected trailing content", line_);
    }
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

inline std::vector<double> read_row(LineReader& r, std::size_t count, const char* what) {
  const std::string s = r.next(what);
  const auto toks = split_ws(s);
  if (toks.size() != count)
    throw InputError(std::string(what) + ": expected " + std::to_string(count) + " values, found " +
                         std::to_string(toks.size()),
                     r.line());
  std::vector<double> row;
  row.reserve(count);
  for (const auto t : toks) row.push_back(parse_real(t, r.line()));
  return row;
}

inline RealMatrix read_square_symmetric(LineReader& r, std::size_t n, const char* what) {
  RealMatrix m(n, n);
  const std::size_t first = r.line() + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = read_row(r, n, what);
    for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (m(i, j) != m(j, i)) throw InputError(std::string(what) + " is not symmetric", first + i);
  return m;
}

}  // namespace detail

inline MatrixFile parse_matrix_file(std::istream& in) {
  detail::LineReader r(in);
  const std::string header = r.next("header 'N K [PV]'");
  const auto toks = detail::split_ws(header);
  if (toks.size() != 2 && toks.size() != 3) throw InputError("header must be 'N K' or 'N K PV'", 1);
  const std::size_t n = detail::parse_count(toks[0], 1, "state count N");
  const std::size_t k = detail::parse_count(toks[1], 1, "channel count K");
  const bool has_pv = toks.size() == 3;
  if (has_pv && toks[2] != "PV") throw InputError("unknown header marker '" + std::string(toks[2]) + "'", 1);
  if (n > 64) throw InputError("N must be <= 64", 1);

  MatrixFile out;
  out.h_cl = detail::read_square_symmetric(r, n, "H_cl row");
  out.coupling.w = RealMatrix(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = detail::read_row(r, k, "W row");
    for (std::size_t c = 0; c < k; ++c) out.coupling.w(i, c) = row[c];
  }
  if (has_pv) out.pv_term = detail::read_square_symmetric(r, n, "PV row");
  r.expect_end();
  return out;
}

inline MatrixFile parse_matrix_string(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_file(in);
}

inline MatrixFile load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  return parse_matrix_file(in);
}

}  // namespace openqs
