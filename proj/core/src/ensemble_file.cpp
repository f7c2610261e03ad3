#include "bbmflow/ensemble_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace bbmflow {

using json = nlohmann::ordered_json;

std::string to_string(EnsembleFileErrorCode code) {
  switch (code) {
    case EnsembleFileErrorCode::open_failed: return "open failed";
    case EnsembleFileErrorCode::malformed_header: return "malformed header";
    case EnsembleFileErrorCode::version_mismatch: return "version mismatch";
    case EnsembleFileErrorCode::truncated_body: return "truncated body";
    case EnsembleFileErrorCode::trailing_data: return "trailing data";
    case EnsembleFileErrorCode::invalid_record: return "invalid record";
  }
  return "unknown";
}

namespace {

void put_f64(std::string& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  for (int k = 0; k < 8; ++k) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | static_cast<unsigned char>(p[k]);
  return std::bit_cast<double>(bits);
}

json header_json(const Ensemble& e) {
  json measure{{"kind", to_string(e.spec.kind)}, {"modes", e.spec.modes}, {"v", e.spec.v},
               {"source", e.spec.source}};
  return json{{"version", kEnsembleFileVersion}, {"modes", e.max_mode()}, {"count", e.size()},
              {"seed", e.seed},          {"time", e.time},      {"measure", measure}};
}

[[noreturn]] void fail(EnsembleFileErrorCode code, const std::string& what) {
  throw EnsembleFileError(code, what);
}

EnsembleHeader parse_header(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& ex) {
    fail(EnsembleFileErrorCode::malformed_header, ex.what());
  }
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
    fail(EnsembleFileErrorCode::malformed_header, "missing integer version");
  EnsembleHeader h;
  h.version = j["version"].get<int>();
  if (h.version != kEnsembleFileVersion)
    fail(EnsembleFileErrorCode::version_mismatch,
         "file version " + std::to_string(h.version) + ", expected " + std::to_string(kEnsembleFileVersion));
  try {
    h.modes = j.at("modes").get<int>();
    h.count = j.at("count").get<std::size_t>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.time = j.at("time").get<double>();
    const json& m = j.at("measure");
    h.measure.kind = measure_kind_from_string(m.at("kind").get<std::string>());
    h.measure.modes = m.at("modes").get<int>();
    h.measure.v = m.at("v").get<std::vector<double>>();
    h.measure.source = m.at("source").get<std::string>();
  } catch (const json::exception& ex) {
    fail(EnsembleFileErrorCode::malformed_header, ex.what());
  } catch (const std::invalid_argument& ex) {
    fail(EnsembleFileErrorCode::malformed_header, ex.what());
  }
  if (h.modes < 0 || h.count < 1 || !std::isfinite(h.time))
    fail(EnsembleFileErrorCode::malformed_header, "modes, count or time out of range");
  return h;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(EnsembleFileErrorCode::open_failed, path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string encode_ensemble(const Ensemble& e) {
  e.validate();
  std::string out = header_json(e).dump();
  out.push_back('\n');
  out.reserve(out.size() + e.size() * std::size_t(e.max_mode() + 1) * 16);
  for (const auto& u : e.samples)
    for (const Complex& c : u.coeffs()) {
      put_f64(out, c.real());
      put_f64(out, c.imag());
    }
  return out;
}

Ensemble decode_ensemble(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) fail(EnsembleFileErrorCode::malformed_header, "no header line");
  const EnsembleHeader h = parse_header(bytes.substr(0, newline));

  const std::size_t record = std::size_t(h.modes + 1) * 16;
  const std::size_t expected = h.count * record;
  const std::size_t body = bytes.size() - newline - 1;
  if (body < expected)
    fail(EnsembleFileErrorCode::truncated_body,
         "body has " + std::to_string(body) + " bytes, header implies " + std::to_string(expected));
  if (body > expected)
    fail(EnsembleFileErrorCode::trailing_data,
         std::to_string(body - expected) + " bytes after the last record");

  Ensemble e;
  e.spec = h.measure;
  e.seed = h.seed;
  e.time = h.time;
  e.samples.reserve(h.count);
  const char* p = bytes.data() + newline + 1;
  for (std::size_t i = 0; i < h.count; ++i) {
    std::vector<Complex> c(std::size_t(h.modes) + 1);
    for (auto& z : c) {
      z = Complex(get_f64(p), get_f64(p + 8));
      p += 16;
    }
    try {
      e.samples.emplace_back(std::move(c));
    } catch (const std::invalid_argument& ex) {
      fail(EnsembleFileErrorCode::invalid_record, "record " + std::to_string(i) + ": " + ex.what());
    }
  }
  return e;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(EnsembleFileErrorCode::open_failed, tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(EnsembleFileErrorCode::open_failed, "write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_ensemble(const Ensemble& e, const std::filesystem::path& path) {
  write_file_atomic(path, encode_ensemble(e));
}

Ensemble read_ensemble(const std::filesystem::path& path) { return decode_ensemble(read_all(path)); }

EnsembleHeader read_ensemble_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(EnsembleFileErrorCode::open_failed, path.string());
  std::string line;
  if (!std::getline(in, line) || in.eof()) fail(EnsembleFileErrorCode::malformed_header, "no header line");
  return parse_header(line);
}

}  // namespace bbmflow
