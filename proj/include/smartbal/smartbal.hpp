#pragma once

#include "smartbal/config.hpp"
#include "smartbal/csv.hpp"
#include "smartbal/ewa.hpp"
#include "smartbal/game.hpp"
#include "smartbal/grid.hpp"
#include "smartbal/hash.hpp"
#include "smartbal/injection.hpp"
#include "smartbal/pricing.hpp"
#include "smartbal/rng.hpp"
#include "smartbal/runner.hpp"
#include "smartbal/scenario.hpp"
