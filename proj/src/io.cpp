#include "nevac/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace nevac {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

std::optional<long> to_long(std::string_view token) {
  long v = 0;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

Real to_real(std::string_view token, PrecisionBits bits, std::size_t line) {
  try {
    return Real::parse(token, bits);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed number '" + std::string(token) + "'", line);
  }
}

struct Row {
  std::size_t line;
  std::vector<std::string> tokens;
};

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing: " + std::strerror(errno));
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

void write_metadata(std::ostream& out, const Metadata& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << '=' << value << '\n';
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

DataFile parse_data_text(const std::string& text, PrecisionBits bits) {
  std::optional<std::string> beta_text;
  std::optional<std::string> kind;
  std::vector<Row> rows;

  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("#!")) {
      const std::string_view body = trim(line.substr(2));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError("directive without '='", line_no);
      const std::string key(trim(body.substr(0, eq)));
      const std::string value(trim(body.substr(eq + 1)));
      if (key == "beta") {
        beta_text = value;
      } else if (key == "statistics") {
        if (value != "bosonic" && value != "fermionic" && value != "tau") {
          throw ParseError("statistics must be bosonic, fermionic or tau, got '" + value + "'", line_no);
        }
        kind = value;
      } else {
        throw ParseError("unknown directive '" + key + "'", line_no);
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    const auto tokens = split_ws(line);
    rows.push_back({line_no, std::vector<std::string>(tokens.begin(), tokens.end())});
  }

  if (!beta_text) throw ParseError("missing directive '#! beta='");
  if (!kind) throw ParseError("missing directive '#! statistics='");
  if (rows.empty()) throw ParseError("no data rows");

  Real beta(bits);
  try {
    beta = Real::parse(*beta_text, bits);
  } catch (const std::invalid_argument&) {
    throw ParseError("beta directive is not a number: '" + *beta_text + "'");
  }
  if (beta.sign() <= 0 || !beta.is_finite()) throw ParseError("beta must be positive");

  if (*kind == "tau") {
    ImaginaryTimeData data;
    data.beta = beta.to_double();
    for (const auto& row : rows) {
      if (row.tokens.size() != 2 && row.tokens.size() != 3) {
        throw ParseError("expected 'tau value [imag]', got " + std::to_string(row.tokens.size()) + " columns",
                         row.line);
      }
      const auto tau = to_double(row.tokens[0]);
      const auto re = to_double(row.tokens[1]);
      const auto im = row.tokens.size() == 3 ? to_double(row.tokens[2]) : std::optional<double>(0.0);
      if (!tau || !re || !im) throw ParseError("malformed number", row.line);
      if (!data.taus.empty() && *tau <= data.taus.back()) throw ParseError("tau column is not increasing", row.line);
      if (!(*tau > 0.0 && *tau < data.beta)) throw ParseError("tau outside (0, beta)", row.line);
      data.taus.push_back(*tau);
      data.values.emplace_back(*re, *im);
    }
    return {std::move(data), *beta_text};
  }

  MatsubaraData data;
  data.beta = beta;
  data.statistics = *kind == "bosonic" ? Statistics::Bosonic : Statistics::Fermionic;
  data.precision_bits = bits;
  for (const auto& row : rows) {
    if (row.tokens.size() != 3) {
      throw ParseError("expected 'n Re Im', got " + std::to_string(row.tokens.size()) + " columns", row.line);
    }
    const auto n = to_long(row.tokens[0]);
    if (!n) throw ParseError("index '" + std::string(row.tokens[0]) + "' is not an integer", row.line);
    if (!data.indices.empty() && *n <= data.indices.back()) {
      throw ParseError("index column is not increasing", row.line);
    }
    data.indices.push_back(*n);
    data.values.push_back(Complex{to_real(row.tokens[1], bits, row.line), to_real(row.tokens[2], bits, row.line)});
  }
  return {std::move(data), *beta_text};
}

DataFile parse_data_file(const std::string& path, PrecisionBits bits) { return parse_data_text(read_file(path), bits); }

void write_matsubara(const std::string& path, const MatsubaraData& data, const std::string& beta_text,
                     const Metadata& metadata) {
  require_valid(data);
  auto out = open_for_writing(path);
  out << "#! beta=" << beta_text << '\n';
  out << "#! statistics=" << to_string(data.statistics) << '\n';
  write_metadata(out, metadata);
  for (std::size_t k = 0; k < data.size(); ++k) {
    out << data.indices[k] << ' ' << data.values[k].re.to_string() << ' ' << data.values[k].im.to_string() << '\n';
  }
  finish(out, path);
}

void emit_spectral(const std::string& path, const SpectralFunction& rho, const Metadata& metadata) {
  auto out = open_for_writing(path);
  write_metadata(out, metadata);
  out << "# omega rho\n";
  char buf[64];
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", rho.grid[i], rho.values[i]);
    out << buf;
  }
  finish(out, path);
}

SpectralFile parse_spectral_file(const std::string& path) {
  const std::string text = read_file(path);
  SpectralFile file;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) file.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    const auto tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError("expected 'omega rho'", line_no);
    const auto w = to_double(tokens[0]);
    const auto v = to_double(tokens[1]);
    if (!w || !v) throw ParseError("malformed number", line_no);
    file.omega.push_back(*w);
    file.values.push_back(*v);
  }
  return file;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  std::string s(buf, ptr);
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  std::string sign;
  if (exponent.front() == '+' || exponent.front() == '-') {
    if (exponent.front() == '-') sign = "-";
    exponent.erase(0, 1);
  }
  exponent.erase(0, std::min(exponent.find_first_not_of('0'), exponent.size() - 1));
  return mantissa + "e" + sign + exponent;
}

}  // namespace nevac
