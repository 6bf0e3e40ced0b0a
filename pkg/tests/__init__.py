import sys

from sprtree import service

self = sys.modules[__name__]

self.service = service.Service()
