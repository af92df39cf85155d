#pragma once

// Text file formats.
//
// Data files carry whitespace-separated columns with `#` comments and two
// required directives:
//
//   #! beta=100
//   #! statistics=bosonic        (bosonic | fermionic | tau)
//   0  -1.25  0.0                (Matsubara rows: n Re Im)
//
// tau files hold `tau value [imag]` rows. Spectral output files start with a
// `# key=value` metadata block followed by `omega rho` rows.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nevac/domain.hpp"

namespace nevac {

class ParseError : public std::runtime_error {
 public:
  /// `line` is 1-based; 0 when the error is not tied to a line.
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using DataSet = std::variant<MatsubaraData, ImaginaryTimeData>;

struct DataFile {
  DataSet data;
  std::string beta_text;  // the beta directive as written
};

/// Decimal values are parsed at `bits`.
DataFile parse_data_text(const std::string& text, PrecisionBits bits);
DataFile parse_data_file(const std::string& path, PrecisionBits bits);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Matsubara rows with enough digits to reproduce every value at its
/// precision. `metadata` lines are written as `# key=value` after the directives.
void write_matsubara(const std::string& path, const MatsubaraData& data, const std::string& beta_text,
                     const Metadata& metadata = {});

/// `omega rho` rows with 17 significant digits after the metadata block.
void emit_spectral(const std::string& path, const SpectralFunction& rho, const Metadata& metadata);

struct SpectralFile {
  Metadata metadata;
  std::vector<double> omega;
  std::vector<double> values;
};

SpectralFile parse_spectral_file(const std::string& path);

/// Shortest text that reads back to the same double, with a compact
/// exponent (1e-4 rather than 1e-04).
std::string format_double(double value);

std::string read_file(const std::string& path);

}  // namespace nevac
