#pragma once

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/autodiff/tape.hpp"
#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/error.hpp"
#include "ranspinn/common/parallel.hpp"
#include "ranspinn/common/rng.hpp"
#include "ranspinn/evalreport/metrics.hpp"
#include "ranspinn/evalreport/report.hpp"
#include "ranspinn/net/batch.hpp"
#include "ranspinn/net/dense_net.hpp"
#include "ranspinn/net/ensemble.hpp"
#include "ranspinn/physics/flow_state.hpp"
#include "ranspinn/physics/residuals.hpp"
#include "ranspinn/physics/scales.hpp"
#include "ranspinn/sampler/point_cloud.hpp"
#include "ranspinn/sampler/source_terms.hpp"
#include "ranspinn/sampler/zone_sampler.hpp"
#include "ranspinn/trainer/adam.hpp"
#include "ranspinn/trainer/config.hpp"
#include "ranspinn/trainer/dataset.hpp"
#include "ranspinn/trainer/engine.hpp"
#include "ranspinn/trainer/loss.hpp"
#include "ranspinn/trainer/train.hpp"
#include "ranspinn/workbench/checkpoint.hpp"
#include "ranspinn/workbench/cli.hpp"
#include "ranspinn/workbench/config_file.hpp"
#include "ranspinn/workbench/mms.hpp"
#include "ranspinn/workbench/pipeline.hpp"
