#pragma once

#include "diracmean/action.hpp"
#include "diracmean/cylinder.hpp"
#include "diracmean/cylinder_function.hpp"
#include "diracmean/equidistribution.hpp"
#include "diracmean/error.hpp"
#include "diracmean/mean.hpp"
#include "diracmean/oracle.hpp"
#include "diracmean/oscillatory.hpp"
#include "diracmean/seq.hpp"
#include "diracmean/weights.hpp"
