from ncdtree.cli.commands import audit, blockdist, compare, experiment, gen, maketree, ncd

COMMAND_MODULES = (ncd, maketree, audit, gen, experiment, blockdist, compare)
