#include "affect/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "affect/error.hpp"

namespace affect::nn {

namespace {

constexpr std::string_view kMagic = "affect-checkpoint";

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xFF);
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

struct Parsed {
  std::vector<TensorHeader> headers;
  std::string payload;
};

Parsed parse(const std::filesystem::path& path, bool want_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  auto bad = [&](const std::string& why) {
    return Error(Errc::ParseError, path.string() + ": " + why);
  };
  std::string line;
  std::getline(in, line);
  std::istringstream magic(line);
  std::string word;
  int version = 0;
  if (!(magic >> word >> version) || word != kMagic) throw bad("not a checkpoint");
  if (version != kCheckpointVersion) throw bad(fmt::format("unsupported version {}", version));
  std::getline(in, line);
  std::istringstream count_line(line);
  std::size_t n = 0;
  if (!(count_line >> word >> n) || word != "tensors") throw bad("missing tensor count");
  Parsed parsed;
  for (std::size_t i = 0; i < n; ++i) {
    std::getline(in, line);
    std::istringstream ls(line);
    TensorHeader h;
    std::size_t rank = 0;
    if (!(ls >> h.name >> rank)) throw bad("malformed tensor header");
    h.shape.resize(rank);
    for (auto& d : h.shape) {
      if (!(ls >> d)) throw bad("malformed tensor shape");
    }
    parsed.headers.push_back(std::move(h));
  }
  std::getline(in, line);
  if (line != "payload") throw bad("missing payload marker");
  if (want_payload) {
    std::ostringstream rest;
    rest << in.rdbuf();
    parsed.payload = rest.str();
  }
  return parsed;
}

}  // namespace

void save_checkpoint(const ParamList& params, const std::filesystem::path& path) {
  std::string out = fmt::format("{} {}\ntensors {}\n", kMagic, kCheckpointVersion, params.size());
  std::size_t total = 0;
  for (const auto* p : params) {
    out += fmt::format("{} {}", p->name, p->value.shape.size());
    for (auto d : p->value.shape) out += fmt::format(" {}", d);
    out += '\n';
    total += p->value.size();
  }
  out += "payload\n";
  out.reserve(out.size() + total * 8);
  for (const auto* p : params) {
    for (double v : p->value.data) put_le(out, v);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(Errc::IoError, "short write to " + path.string());
}

void load_checkpoint(const ParamList& params, const std::filesystem::path& path) {
  const auto parsed = parse(path, true);
  if (parsed.headers.size() != params.size()) {
    throw Error(Errc::ShapeMismatch,
                fmt::format("{}: {} tensors, model has {}", path.string(),
                            parsed.headers.size(), params.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& h = parsed.headers[i];
    if (h.name != params[i]->name || h.shape != params[i]->value.shape) {
      throw Error(Errc::ShapeMismatch,
                  fmt::format("{}: tensor {} is {}, model expects {}", path.string(), i, h.name,
                              params[i]->name));
    }
    total += params[i]->value.size();
  }
  if (parsed.payload.size() != total * 8) {
    throw Error(Errc::ParseError, path.string() + ": payload size mismatch");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(parsed.payload.data());
  for (auto* p : params) {
    for (double& v : p->value.data) {
      v = get_le(bytes);
      bytes += 8;
    }
  }
}

std::vector<TensorHeader> read_checkpoint_header(const std::filesystem::path& path) {
  return parse(path, false).headers;
}

}  // namespace affect::nn
