from .benchmark import BenchmarkCell, run_benchmark, run_cell
from .fit import fit_dataset
from .predict import imputation_accuracy, predict_from_trace
from .project import ExperimentBase
from .report import report_trace
from .simulate import simulate_dataset
