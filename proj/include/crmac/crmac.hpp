// Umbrella header.
#pragma once

#include "crmac/config.hpp"
#include "crmac/core_model.hpp"
#include "crmac/csv.hpp"
#include "crmac/fading.hpp"
#include "crmac/mac.hpp"
#include "crmac/policies.hpp"
#include "crmac/rng.hpp"
#include "crmac/runner.hpp"
