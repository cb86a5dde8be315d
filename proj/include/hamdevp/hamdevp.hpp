#pragma once

#include "hamdevp/arnoldi.hpp"
#include "hamdevp/chebfun.hpp"
#include "hamdevp/io.hpp"
#include "hamdevp/problem.hpp"
#include "hamdevp/quadrature.hpp"
#include "hamdevp/shifted_operator.hpp"
#include "hamdevp/skew_form.hpp"
