"""Desk-scale model of a multi-tenant key-value store's resource controls.

Modules: ``ru`` (request units), ``admission`` (proxy and partition quotas),
``wfq`` (node scheduling), ``cache`` (node and proxy caches, fan-out
routing), ``forecast`` and ``autoscale`` (quota elasticity), ``reschedule``
(replica placement), ``simkit`` (discrete-event simulator), ``config`` and
``cli``.
"""

__version__ = "0.1.0"
