#pragma once

// Umbrella header.
#include "riss/config.hpp"
#include "riss/corpus.hpp"
#include "riss/error.hpp"
#include "riss/idiom.hpp"
#include "riss/metrics.hpp"
#include "riss/pipeline.hpp"
#include "riss/readability.hpp"
#include "riss/selection.hpp"
#include "riss/similarity.hpp"
#include "riss/statistics.hpp"
#include "riss/tree.hpp"
