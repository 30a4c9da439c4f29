#ifndef MANIF_MANIF_HPP
#define MANIF_MANIF_HPP

// Umbrella header for the whole library.

#include "manif/bezier.hpp"
#include "manif/dataset.hpp"
#include "manif/distance.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/experiment.hpp"
#include "manif/losses.hpp"
#include "manif/metrics.hpp"
#include "manif/mmcr.hpp"
#include "manif/param_vector.hpp"
#include "manif/rng.hpp"
#include "manif/serialize.hpp"
#include "manif/sisa.hpp"
#include "manif/split.hpp"
#include "manif/train.hpp"
#include "manif/unlearn.hpp"

#endif
