#pragma once

#include "rough/errors.hpp"
#include "rough/fbm_model.hpp"
#include "rough/io.hpp"
#include "rough/marginals.hpp"
#include "rough/partition.hpp"
#include "rough/rng.hpp"
#include "rough/roughness.hpp"
#include "rough/sampler.hpp"
#include "rough/schauder.hpp"
#include "rough/special_functions.hpp"
#include "rough/stats.hpp"
#include "rough/version.hpp"
