#pragma once

#include "signflow/codebook.hpp"
#include "signflow/descriptors.hpp"
#include "signflow/error.hpp"
#include "signflow/eval.hpp"
#include "signflow/fusion.hpp"
#include "signflow/hmm.hpp"
#include "signflow/linear_svm.hpp"
#include "signflow/mask.hpp"
#include "signflow/matrix.hpp"
#include "signflow/pipeline.hpp"
#include "signflow/posture.hpp"
#include "signflow/skeleton.hpp"
#include "signflow/synthetic.hpp"
#include "signflow/version.hpp"
