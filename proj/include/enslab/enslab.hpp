#pragma once

#include "enslab/calibrate.hpp"
#include "enslab/chaos.hpp"
#include "enslab/config.hpp"
#include "enslab/density.hpp"
#include "enslab/ensemble.hpp"
#include "enslab/errors.hpp"
#include "enslab/experiments.hpp"
#include "enslab/io.hpp"
#include "enslab/models.hpp"
#include "enslab/rng.hpp"
#include "enslab/stats.hpp"
