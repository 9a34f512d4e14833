#pragma once

#include <string>

#include "mediatrix/effects.hpp"
#include "mediatrix/engine.hpp"

namespace mediatrix {

// Textual world form: "natural", "A=1", "A=1, M=low", "A=1, M~pot(0)",
// "A=0, M~pot(1|C)", "A=1, M~mix(0.5*obs(1|C), 0.5*obs(0|C))".
// In world position, M~pot(a) is the unit-level potential M(a); the
// stochastic draw from the stratum law is written M~pot(a|C), and the
// marginal variant M~pot(a|.).
WorldSpec parse_world(const std::string& text);

// Mediator distribution text, as accepted by --gide: point(v), pot(a),
// pot(a|C), obs(a), obs(a|C), mix(w*spec, ...). A bare pot(a)/obs(a) here
// means the marginal law (there is no unit-level reading in this position).
MediatorDistributionSpec parse_mediator_spec(const std::string& text);

// "A=1" or "C=0, A=1"; the empty string is the empty condition.
Condition parse_condition(const std::string& text);

// "left || right" or "left || right | condition".
EffectQuery parse_contrast(const std::string& text);

}  // namespace mediatrix
