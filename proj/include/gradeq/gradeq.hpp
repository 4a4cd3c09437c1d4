#ifndef GRADEQ_GRADEQ_HPP
#define GRADEQ_GRADEQ_HPP

#include "gradeq/counterexamples.hpp"
#include "gradeq/csv.hpp"
#include "gradeq/datagen.hpp"
#include "gradeq/descent.hpp"
#include "gradeq/equilibrium.hpp"
#include "gradeq/losses.hpp"
#include "gradeq/pipelines.hpp"
#include "gradeq/rng.hpp"
#include "gradeq/schedule.hpp"
#include "gradeq/vec.hpp"

#endif
