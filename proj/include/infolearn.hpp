#pragma once

#include "infolearn/beliefs.hpp"
#include "infolearn/config.hpp"
#include "infolearn/consensus.hpp"
#include "infolearn/dynamics.hpp"
#include "infolearn/format.hpp"
#include "infolearn/montecarlo.hpp"
#include "infolearn/normal.hpp"
#include "infolearn/observer.hpp"
#include "infolearn/tails.hpp"
