#pragma once

#include <sbm_ident/affiliation_estimators.hpp>
#include <sbm_ident/error.hpp>
#include <sbm_ident/exact_oracle.hpp>
#include <sbm_ident/io.hpp>
#include <sbm_ident/kruskal.hpp>
#include <sbm_ident/mixture_recovery.hpp>
#include <sbm_ident/model.hpp>
#include <sbm_ident/moments.hpp>
#include <sbm_ident/polynomial.hpp>
#include <sbm_ident/random.hpp>
#include <sbm_ident/sampler.hpp>
#include <sbm_ident/truncated_poisson.hpp>
