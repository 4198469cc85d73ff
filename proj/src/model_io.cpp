#include "kpicast/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace kpicast {

namespace {

constexpr std::array<char, 8> kMagic = {'K', 'P', 'I', 'C', 'M', 'D', 'L', '1'};
constexpr std::uint64_t kMaxParams = std::uint64_t{1} << 32;

template <typename U>
void put_uint(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_real(std::ostream& out, double value) { put_uint(out, std::bit_cast<std::uint64_t>(value)); }

template <typename U>
U get_uint(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ModelFormatError("model file truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

double get_real(std::istream& in) { return std::bit_cast<double>(get_uint<std::uint64_t>(in)); }

void put_scale(std::ostream& out, const ScaleParams& p) {
  put_real(out, p.c);
  put_real(out, p.d);
  put_real(out, p.lo);
  put_real(out, p.hi);
}

ScaleParams get_scale(std::istream& in) {
  ScaleParams p;
  p.c = get_real(in);
  p.d = get_real(in);
  p.lo = get_real(in);
  p.hi = get_real(in);
  return p;
}

}  // namespace

ModelBundle bundle_of(const FittedSeries& fitted) {
  return ModelBundle{fitted.model,  fitted.mean_scale,  fitted.last_scale,
                     fitted.window, fitted.mean_output, fitted.selection.weights};
}

void save_model(std::ostream& out, const ModelBundle& b) {
  out.write(kMagic.data(), kMagic.size());
  put_uint<std::uint32_t>(out, kModelFormatVersion);
  const auto& dims = b.model.dims();
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) put_uint<std::uint64_t>(out, d);
  put_real(out, b.model.dropout());
  put_scale(out, b.mean_scale);
  put_scale(out, b.last_scale);
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(b.window.k));
  put_uint<std::uint32_t>(out, b.window.variant == AnchorVariant::weekday_offset ? 0u : 1u);
  put_real(out, b.mean_output);
  put_real(out, b.weights.w_mean);
  put_real(out, b.weights.w_nn);
  const auto params = b.model.params();
  put_uint<std::uint64_t>(out, params.size());
  for (double p : params) put_real(out, p);
  if (!out) throw ModelFormatError("failed to write model");
}

ModelBundle load_model(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ModelFormatError("not a kpicast model file");
  const auto version = get_uint<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  const auto n_dims = get_uint<std::uint32_t>(in);
  if (n_dims < 2 || n_dims > 64) throw ModelFormatError("implausible layer count");
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i < n_dims; ++i) {
    const auto d = get_uint<std::uint64_t>(in);
    if (d == 0 || d > kMaxParams) throw ModelFormatError("implausible layer size");
    dims.push_back(static_cast<std::size_t>(d));
  }
  const double dropout = get_real(in);
  const ScaleParams mean_scale = get_scale(in);
  const ScaleParams last_scale = get_scale(in);
  WindowConfig window;
  window.k = static_cast<int>(get_uint<std::uint32_t>(in));
  const auto variant = get_uint<std::uint32_t>(in);
  if (variant > 1) throw ModelFormatError("unknown anchor variant");
  window.variant = variant == 0 ? AnchorVariant::weekday_offset : AnchorVariant::week_start;
  const double mean_output = get_real(in);
  EnsembleWeights weights;
  weights.w_mean = get_real(in);
  weights.w_nn = get_real(in);
  const auto n_params = get_uint<std::uint64_t>(in);
  if (n_params != MlpModel::parameter_count(dims)) {
    throw ModelFormatError("parameter count does not match layer sizes");
  }
  std::vector<double> params(static_cast<std::size_t>(n_params));
  for (auto& p : params) p = get_real(in);
  try {
    return ModelBundle{MlpModel(std::move(dims), dropout, std::move(params)), mean_scale, last_scale,
                       window, mean_output, weights};
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("invalid model: ") + e.what());
  }
}

void save_model_file(const std::string& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError("cannot open '" + path + "' for writing");
  save_model(out, bundle);
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace kpicast
