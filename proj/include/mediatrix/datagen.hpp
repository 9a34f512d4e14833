#pragma once

#include <cstdint>
#include <string>

#include "mediatrix/estimate.hpp"
#include "mediatrix/scm.hpp"

namespace mediatrix {

struct SamplerConfig {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  bool include_latents = false;
};

// Samples n independent rows of the natural world. Row i depends only on
// (seed, i), so any prefix of a larger run matches a smaller one.
Dataset sample_dataset(const Scm& scm, const SamplerConfig& config);

Scm read_scm(const std::string& path);
void write_scm(const Scm& scm, const std::string& path);

Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& dataset, const std::string& path);
std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(const std::string& text);

// Checks column names and every value against the model's declared
// supports; errors name the row and column.
void validate_dataset(const Scm& scm, const Dataset& dataset);

}  // namespace mediatrix
