# doflab tests
