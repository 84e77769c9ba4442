#pragma once

#include "kschemo/control.hpp"
#include "kschemo/diagnostics.hpp"
#include "kschemo/elliptic.hpp"
#include "kschemo/grid.hpp"
#include "kschemo/integrator.hpp"
#include "kschemo/model.hpp"
#include "kschemo/norms.hpp"
#include "kschemo/reduce.hpp"
#include "kschemo/samples.hpp"
#include "kschemo/spectral.hpp"
