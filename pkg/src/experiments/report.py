from src.noma.noma_model import Scenario, equal_power_allocation, rate_report
from src.optim.solver import SolveResult


def solve_report(scenario: Scenario, result: SolveResult) -> dict:
    """JSON-ready solve summary with per-user values in input order"""
    report = {
        "status": result.status.value,
        "message": result.message,
        "outer_iterations": result.outer_iterations,
        "newton_iterations": result.newton_iterations,
        "kkt_residual": result.kkt_residual,
        "transformed_objective": result.transformed_objective,
        "rate_binding_gaps": list(result.rate_binding_gaps),
        # reference point: the equal split inside both budgets
        "equal_power_objective": rate_report(scenario, equal_power_allocation(scenario)).harmonic_objective,
    }
    if result.sorted_allocation is not None:
        rates = rate_report(scenario, result.sorted_allocation)
        report.update({
            "powers_mw": list(result.allocation.powers),
            "rates_nats": scenario.to_original(rates.rates).tolist(),
            "sum_rate_nats": rates.sum_rate,
            "harmonic_objective": rates.harmonic_objective,
            "jain_fairness": rates.jain_fairness,
        })
    return report
