#pragma once

#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/parallel.hpp"
#include "lexvar/corpus.hpp"
#include "lexvar/matrix.hpp"
#include "lexvar/varstats.hpp"
#include "lexvar/lsa.hpp"
#include "lexvar/plsa.hpp"
#include "lexvar/lda.hpp"
#include "lexvar/synth.hpp"
