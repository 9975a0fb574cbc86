# planning package
