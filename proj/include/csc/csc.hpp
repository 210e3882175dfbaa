#pragma once

#include "csc/conv_dictionary.hpp"
#include "csc/dictgen.hpp"
#include "csc/errors.hpp"
#include "csc/harness.hpp"
#include "csc/io.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/measures.hpp"
#include "csc/pursuit.hpp"
#include "csc/rng.hpp"
#include "csc/spark.hpp"
#include "csc/sparse_code.hpp"
#include "csc/version.hpp"
