"""Maximum Colorful Arborescence: exact solvers, kernelization, generators."""

from .instance import (
    ColorHierarchy,
    Instance,
    Solution,
    Stats,
    color_hierarchy,
    parse_instance,
    prune_unreachable,
    stats,
    topological_order,
    validate,
    verify_solution,
    write_instance,
)
from .oracle import best_arborescence_on_set, brute_force_solve
from .poly import autonomous_colors, is_arb_hierarchy, solve_arb_hierarchy
from .dpcolors import solve_colors_dp
from .dpdifficult import difficult_set, solve_difficult_dp
from .kernel import (
    apply_rule_autonomous,
    apply_rule_chain,
    apply_rule_unique_inarcs,
    check_kernel_bounds,
    kernelize,
    max_weight_path,
)
from .treewidth import (
    decompose,
    enumerate_fully_colorful,
    make_nice,
    solve_selection,
    solve_treewidth,
)
from .generators import (
    SetCoverInstance,
    gen_random,
    or_compose,
    reduce_multicolored_set_cover,
    reduce_set_cover,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
