#pragma once

#include "longcf/csv.hpp"
#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/generation.hpp"
#include "longcf/io.hpp"
#include "longcf/metrics.hpp"
#include "longcf/models.hpp"
#include "longcf/normalization.hpp"
#include "longcf/ranking.hpp"
#include "longcf/rng.hpp"
#include "longcf/schema.hpp"
#include "longcf/simulate.hpp"
