import functools
import math
import typing as t

from ..funcspaces import SpaceParams, cutoff_independence_check, embedding_check
from ..product import ProductSpace
from .abstract import SuiteAbstract, TTask


def sobolev_target(ps: ProductSpace, source: SpaceParams) -> t.Optional[SpaceParams]:
    """
    B^s_{p,q} -> B^{s'}_{2p,q} with s'/d - 1/(2p) = s/d - 1/p on every axis;
    None when p is infinite or the source is not a B space.
    """
    p = source.get_p()
    if math.isinf(p) or source.get_family() != "B":
        return None
    d1, d2 = ps.get_d_pair()
    if source.get_flavor() == "ordinary":
        d1 = d2 = d1 + d2
    shift = 1.0 / p - 1.0 / (2.0 * p)
    s1, s2 = source.get_s()
    return source.replace(p=2.0 * p, s=(s1 - d1 * shift, s2 - d2 * shift))


class SpacesSuite(SuiteAbstract):
    name = "spaces"

    def get_tasks(self) -> t.List[TTask]:
        ps = self.get_product_space()
        conf = self._config
        stability = self.get_stability()
        test_set = self.get_test_set()
        primary, secondary = conf.get_cutoffs("primary"), conf.get_cutoffs("secondary")
        tasks: t.List[TTask] = []
        for params in conf.get_spaces():
            tasks.append(
                functools.partial(
                    cutoff_independence_check,
                    primary,
                    secondary,
                    test_set,
                    params,
                    ratio_bound=conf.get_tolerance("ratio_bound"),
                    stability=stability,
                )
            )
            target = sobolev_target(ps, params)
            if target is not None:
                tasks.append(
                    functools.partial(embedding_check, primary, test_set, params, target, stability=stability)
                )
            if min(params.get_s()) > 0:
                tasks.append(functools.partial(embedding_check, primary, test_set, params, None, stability=stability))
        return tasks
