"""The default instance registry.

Registration order is part of the contract: resolution tries direct
instances in this order before any derivation, so more specific domains
(deferred streams before plain streams, task collections before generic
returns) must be registered first.
"""

from __future__ import annotations

from .core import InstanceRegistry
from .derivation import DEFAULT_RULES
from .keywords import (await_deferred, await_deferred_stream,
                       continue_collection, continue_stream, each_collection,
                       each_stream, get_state, put_state, return_continuation,
                       return_direct, shift_forward, yield_deferred_stream,
                       yield_stream)
from .task import continue_task, each_tasks, fork_tasks, return_singleton_task

_DEFAULT_INSTANCES = (
    yield_deferred_stream,
    yield_stream,
    await_deferred_stream,
    await_deferred,
    shift_forward,
    get_state,
    put_state,
    each_collection,
    each_stream,
    each_tasks,
    fork_tasks,
    continue_collection,
    continue_stream,
    continue_task,
    return_singleton_task,
    return_continuation,
    return_direct,
)


def default_registry(max_depth: int = 16) -> InstanceRegistry:
    registry = InstanceRegistry(max_depth=max_depth)
    for instance in _DEFAULT_INSTANCES:
        registry = registry.register_instance(instance)
    for rule in DEFAULT_RULES:
        registry = registry.register_rule(rule)
    return registry.freeze()
