#pragma once

// Umbrella header: the complete local-popularity simulation library.

#include "localpop/rng.hpp"
#include "localpop/model.hpp"
#include "localpop/channel.hpp"
#include "localpop/filter.hpp"
#include "localpop/theory.hpp"
#include "localpop/harness.hpp"
#include "localpop/exact.hpp"
#include "localpop/movielens.hpp"
#include "localpop/serialize.hpp"
