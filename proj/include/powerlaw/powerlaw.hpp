#pragma once

#include "powerlaw/bootstrap.hpp"
#include "powerlaw/error.hpp"
#include "powerlaw/estimator.hpp"
#include "powerlaw/io.hpp"
#include "powerlaw/panel.hpp"
#include "powerlaw/portfolio.hpp"
#include "powerlaw/ranking.hpp"
#include "powerlaw/simulator.hpp"
#include "powerlaw/smoothing.hpp"
#include "powerlaw/stationary.hpp"
#include "powerlaw/version.hpp"
