#pragma once

// Umbrella header for the tubetap simulation library.

#include "tubetap/analysis.hpp"
#include "tubetap/cli.hpp"
#include "tubetap/conflict_graph.hpp"
#include "tubetap/errors.hpp"
#include "tubetap/fixtures.hpp"
#include "tubetap/market.hpp"
#include "tubetap/mechanisms.hpp"
#include "tubetap/peer_grading.hpp"
#include "tubetap/rng.hpp"
#include "tubetap/serialize.hpp"
#include "tubetap/verify.hpp"
