#pragma once

#include "cmapf/bench.hpp"
#include "cmapf/config.hpp"
#include "cmapf/dynamics.hpp"
#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"
#include "cmapf/generators.hpp"
#include "cmapf/geometry.hpp"
#include "cmapf/map_spec.hpp"
#include "cmapf/map_text.hpp"
#include "cmapf/observation.hpp"
#include "cmapf/planners.hpp"
#include "cmapf/policies.hpp"
#include "cmapf/protocol.hpp"
#include "cmapf/reward.hpp"
#include "cmapf/rng.hpp"
#include "cmapf/spatial_hash.hpp"
#include "cmapf/stats.hpp"
#include "cmapf/svg.hpp"
#include "cmapf/trace.hpp"
#include "cmapf/world.hpp"
