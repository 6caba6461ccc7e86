#pragma once

#include <string>

#include "gtlsynth/model.hpp"

namespace gtlsynth {

// Parses a model document and validates it. Throws Error on schema or
// stochasticity violations.
FactoredMdp build_model(const std::string& text);

// Canonical text with sorted keys; build_model(serialize(m)) == m.
std::string serialize(const FactoredMdp& model);

bool same_model(const FactoredMdp& a, const FactoredMdp& b);

} // namespace gtlsynth
