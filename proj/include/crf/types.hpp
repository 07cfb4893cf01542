#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace crf {

/// One stimulus presentation: the full sampled voltage trace plus the
/// index of stimulus onset within it.
struct Trial {
  double contrast = 0.0;  // fraction, 0..0.76
  std::vector<double> samples;
  std::size_t onset_index = 0;
};

struct RawRecording {
  std::string site_id;
  double sample_rate = 0.0;  // Hz
  std::vector<Trial> trials;
};

struct CurvePoint {
  double contrast = 0.0;
  double response = 0.0;  // SNR multiple
  int n_trials = 0;
};

/// Eight (contrast, SNR response) pairs for one recording site, contrasts
/// strictly increasing with the first at zero.
struct TuningCurve {
  std::string site_id;
  std::vector<CurvePoint> points;
};

void validate(const TuningCurve& curve);

/// A pooled regression sample: normalized contrast and SNR response.
struct DataPoint {
  double phi = 0.0;  // normalized input in [0, 1]
  double y = 0.0;
};

}  // namespace crf
