#pragma once

#include "candidate.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "iterate.hpp"
#include "kernel.hpp"
#include "models.hpp"
#include "pdesim.hpp"
#include "report.hpp"
#include "system.hpp"
#include "verify.hpp"
