#pragma once

#include <string_view>
#include <variant>
#include <vector>

namespace sgdlab {

enum class ModelFamily { tensor_pca, bgmm, xor_gmm };

std::string_view family_name(ModelFamily f);

// Flat SGD iterate: x in R^n for PCA, (v, W_1..W_K) for the networks.
struct ParamPoint {
  ModelFamily family;
  std::vector<double> theta;
};

// Noise of one spiked-tensor observation. The lazy form stores only what the
// gradient needs at the current point: the contraction is drawn as
// sqrt(k)|x|^{k-1} (z + sqrt(k-1) xi xhat).
struct LazyTensorNoise {
  std::vector<double> z;
  double xi = 0;
};

// Explicit i.i.d. noise tensor, row-major with n^k entries.
struct DenseTensor {
  int n = 0;
  int k = 0;
  std::vector<double> w;
};

struct PcaDatum {
  std::variant<LazyTensorNoise, DenseTensor> noise;
};

struct MixtureDatum {
  int y = 0;
  std::vector<double> x;
};

using Datum = std::variant<PcaDatum, MixtureDatum>;

}  // namespace sgdlab
