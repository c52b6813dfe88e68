#include "finer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "finer/errors.hpp"

namespace finer {
namespace {

using nlohmann::json;

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

double get_le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const Mlp& mlp = ckpt.mlp;
  json meta;
  meta["dims"] = mlp.dims();
  meta["activation"] = std::string(to_string(mlp.activation().kind));
  meta["omega0"] = mlp.activation().omega0;
  meta["sigma"] = mlp.activation().sigma;
  meta["k"] = ckpt.scheme.bias_halfwidth;
  meta["seed"] = ckpt.scheme.seed;
  meta["bias_scope"] = ckpt.scheme.bias_scope == BiasScope::kAllHidden ? "all-hidden" : "first-layer";
  if (mlp.encoder()) {
    meta["encoder"] = {{"num_bands", mlp.encoder()->num_bands}, {"include_input", mlp.encoder()->include_input}};
  } else {
    meta["encoder"] = nullptr;
  }
  meta["parameters"] = mlp.parameter_count();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << kCheckpointMagic << '\n' << meta.dump() << '\n';
  for (double v : mlp.parameters()) put_le(f, v);
  if (!f) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::string magic;
  std::getline(f, magic);
  if (magic != kCheckpointMagic) throw IoError(path + ": not a FINER checkpoint (bad magic)");
  std::string header;
  if (!std::getline(f, header)) throw IoError(path + ": missing checkpoint header");

  Checkpoint ckpt;
  try {
    const json meta = json::parse(header);
    Activation act;
    act.kind = parse_activation_kind(meta.at("activation").get<std::string>());
    act.omega0 = meta.at("omega0").get<double>();
    act.sigma = meta.at("sigma").get<double>();
    std::optional<PositionalEncoder> enc;
    if (!meta.at("encoder").is_null()) {
      PositionalEncoder e;
      e.num_bands = meta["encoder"].at("num_bands").get<std::size_t>();
      e.include_input = meta["encoder"].at("include_input").get<bool>();
      enc = e;
    }
    ckpt.scheme.bias_halfwidth = meta.at("k").get<double>();
    ckpt.scheme.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.scheme.bias_scope =
        meta.value("bias_scope", std::string("all-hidden")) == "first-layer" ? BiasScope::kFirstLayer : BiasScope::kAllHidden;
    ckpt.mlp = Mlp(meta.at("dims").get<std::vector<std::size_t>>(), act, enc);
    const auto count = meta.at("parameters").get<std::size_t>();
    if (count != ckpt.mlp.parameter_count()) throw IoError(path + ": parameter count does not match dims");
  } catch (const json::exception& e) {
    throw IoError(path + ": bad checkpoint header: " + e.what());
  } catch (const ContractViolation& e) {
    throw IoError(path + ": bad checkpoint header: " + e.what());
  }

  const std::size_t n = ckpt.mlp.parameter_count();
  std::vector<unsigned char> raw(n * 8);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(f.gcount()) != raw.size()) throw IoError(path + ": truncated parameter block");
  if (f.peek() != std::char_traits<char>::eof()) throw IoError(path + ": trailing bytes after parameters");
  std::vector<double> params(n);
  for (std::size_t i = 0; i < n; ++i) params[i] = get_le(raw.data() + 8 * i);
  ckpt.mlp.set_parameters(params);
  return ckpt;
}

}  // namespace finer
