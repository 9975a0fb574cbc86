# mdp package
