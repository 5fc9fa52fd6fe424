// Umbrella header.
#pragma once

#include "mrfmix/analysis.hpp"
#include "mrfmix/distributions.hpp"
#include "mrfmix/em.hpp"
#include "mrfmix/io.hpp"
#include "mrfmix/linalg.hpp"
#include "mrfmix/mrf.hpp"
#include "mrfmix/rng.hpp"
#include "mrfmix/sampler.hpp"
#include "mrfmix/simulate.hpp"
#include "mrfmix/types.hpp"
