#ifndef KSAMPLE_KSAMPLE_HPP_
#define KSAMPLE_KSAMPLE_HPP_

#include "ksample/aggregators.hpp"
#include "ksample/bandit_reproduction.hpp"
#include "ksample/environment.hpp"
#include "ksample/errors.hpp"
#include "ksample/estimators.hpp"
#include "ksample/identity_suite.hpp"
#include "ksample/matrix.hpp"
#include "ksample/numeric.hpp"
#include "ksample/oracle.hpp"
#include "ksample/policy.hpp"
#include "ksample/rng.hpp"
#include "ksample/serialization.hpp"
#include "ksample/trainer.hpp"

#endif  // KSAMPLE_KSAMPLE_HPP_
