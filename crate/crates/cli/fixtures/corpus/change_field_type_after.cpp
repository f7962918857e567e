class Box {
public:
  long size;
  int used;
};
