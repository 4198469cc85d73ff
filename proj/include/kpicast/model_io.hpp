#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "kpicast/ensemble.hpp"

namespace kpicast {

/// Flat binary model file, all integers and reals little-endian:
///
///   magic "KPICMDL1" | u32 version | u32 layer-size count | u64 sizes...
///   f64 dropout | f64 x4 mean scale (c, d, lo, hi) | f64 x4 last scale
///   i32 k | u32 anchor variant | f64 mean output | f64 w_mean | f64 w_nn
///   u64 parameter count | f64 parameters... (row-major, layer by layer)
inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelBundle {
  MlpModel model;
  ScaleParams mean_scale;
  ScaleParams last_scale;
  WindowConfig window;
  double mean_output = 0.0;
  EnsembleWeights weights;
};

ModelBundle bundle_of(const FittedSeries& fitted);

void save_model(std::ostream& out, const ModelBundle& bundle);
ModelBundle load_model(std::istream& in);

void save_model_file(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model_file(const std::string& path);

}  // namespace kpicast
