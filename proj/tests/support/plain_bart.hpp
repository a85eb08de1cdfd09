#pragma once

#include "pfbart/sampler.hpp"

namespace testsupport {

// Reference textbook-BART chain: no fixed-layer machinery anywhere — the
// allowed-variable set is all p covariates, every structurally valid move is
// legal, and the split prior is alpha*(1+d)^-beta. It mirrors the production
// sampler's documented draw order so that, at h = 0, the two must produce
// bit-identical traces from the same seed. config.policy is ignored.
pfbart::Trace run_plain_bart(const pfbart::Dataset& data, const pfbart::SamplerConfig& config);

}  // namespace testsupport
