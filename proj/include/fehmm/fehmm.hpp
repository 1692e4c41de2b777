#pragma once

#include "fehmm/error.hpp"
#include "fehmm/log.hpp"
#include "fehmm/parallel.hpp"
#include "fehmm/trajectory.hpp"

#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/coeff/expr.hpp"

#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/norms.hpp"
#include "fehmm/fem/quadrature.hpp"
#include "fehmm/fem/space.hpp"

#include "fehmm/micro/cell.hpp"
#include "fehmm/micro/oracle.hpp"
#include "fehmm/micro/rescale.hpp"

#include "fehmm/macro/hmm.hpp"
#include "fehmm/fine/fine.hpp"

#include "fehmm/analysis/corrector.hpp"
#include "fehmm/analysis/ehmm.hpp"
#include "fehmm/analysis/errors.hpp"
#include "fehmm/analysis/rates.hpp"
#include "fehmm/analysis/report.hpp"

#include "fehmm/config/driver.hpp"
#include "fehmm/config/presets.hpp"
#include "fehmm/config/run_config.hpp"
