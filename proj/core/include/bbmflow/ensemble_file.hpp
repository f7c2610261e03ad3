#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "bbmflow/random_fields.hpp"

namespace bbmflow {

// Ensemble file layout:
//   line 1: {"version":1,"modes":M,"count":K,"seed":S,"time":t,"measure":{...}}\n
//   body:   K records of M+1 (re, im) pairs, f64 little endian, n = 0..M.

inline constexpr int kEnsembleFileVersion = 1;

enum class EnsembleFileErrorCode {
  open_failed,
  malformed_header,
  version_mismatch,
  truncated_body,
  trailing_data,
  invalid_record,
};

std::string to_string(EnsembleFileErrorCode code);

class EnsembleFileError : public std::runtime_error {
 public:
  EnsembleFileError(EnsembleFileErrorCode code, const std::string& what)
      : std::runtime_error(to_string(code) + ": " + what), code_(code) {}
  EnsembleFileErrorCode code() const noexcept { return code_; }

 private:
  EnsembleFileErrorCode code_;
};

struct EnsembleHeader {
  int version = kEnsembleFileVersion;
  int modes = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double time = 0.0;
  MeasureSpec measure;
};

/// Writes to a temporary sibling and renames it over path.
void write_ensemble(const Ensemble& e, const std::filesystem::path& path);

Ensemble read_ensemble(const std::filesystem::path& path);

/// Parses and checks only the header line.
EnsembleHeader read_ensemble_header(const std::filesystem::path& path);

std::string encode_ensemble(const Ensemble& e);
Ensemble decode_ensemble(const std::string& bytes);

/// Atomic whole-file write used for every output the tools produce.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace bbmflow
