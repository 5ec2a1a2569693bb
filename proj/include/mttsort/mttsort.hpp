#pragma once

#include "mttsort/assignment.hpp"
#include "mttsort/association.hpp"
#include "mttsort/config.hpp"
#include "mttsort/core.hpp"
#include "mttsort/errors.hpp"
#include "mttsort/feature_buffer.hpp"
#include "mttsort/ga.hpp"
#include "mttsort/io.hpp"
#include "mttsort/kalman.hpp"
#include "mttsort/metrics.hpp"
#include "mttsort/sequence.hpp"
#include "mttsort/synth.hpp"
#include "mttsort/track.hpp"
#include "mttsort/tracker.hpp"
