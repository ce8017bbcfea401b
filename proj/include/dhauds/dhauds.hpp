#pragma once

// Umbrella include for the whole toolkit.

#include "dhauds/adapt.hpp"
#include "dhauds/corrupt.hpp"
#include "dhauds/errors.hpp"
#include "dhauds/fft.hpp"
#include "dhauds/linalg.hpp"
#include "dhauds/losses.hpp"
#include "dhauds/manifest.hpp"
#include "dhauds/mel.hpp"
#include "dhauds/metrics.hpp"
#include "dhauds/model.hpp"
#include "dhauds/noise.hpp"
#include "dhauds/optimizer.hpp"
#include "dhauds/pipeline.hpp"
#include "dhauds/resample.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/tables.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/toytask.hpp"
#include "dhauds/vocoder.hpp"
#include "dhauds/wave.hpp"
